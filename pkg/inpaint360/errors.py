"""
Exception hierarchy for inpaint360.

Every error a stage can raise on purpose derives from ``Inpaint360Error`` and
carries the process exit code the CLI should return. Domain errors also derive
from the closest builtin so ordinary ``except ValueError`` code keeps working.
"""

from typing import Optional


class Inpaint360Error(Exception):
    exit_code: int = 1


class ConfigError(Inpaint360Error, ValueError):
    exit_code = 2


class MissingInput(Inpaint360Error, LookupError):
    """An artifact a stage depends on is absent."""

    exit_code = 3

    def __init__(self, artifact: str, detail: str = ""):
        self.artifact = artifact
        message = f"missing input: {artifact}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class NumericalFailure(Inpaint360Error, ArithmeticError):
    exit_code = 4

    def __init__(self, stage: str, iteration: Optional[int], what: str = "loss"):
        self.stage = stage
        self.iteration = iteration
        where = f"iteration {iteration}" if iteration is not None else "evaluation"
        super().__init__(f"non-finite {what} in stage '{stage}' at {where}")


class InvalidCamera(Inpaint360Error, ValueError):
    pass


class NoIntersection(Inpaint360Error, ValueError):
    pass


class DimensionMismatch(Inpaint360Error, ValueError):
    pass


class BadSpec(Inpaint360Error, ValueError):
    pass


class UnknownObject(Inpaint360Error, LookupError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no scene object named '{name}'")


class ParseError(Inpaint360Error, ValueError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")


class EmptyPrompts(Inpaint360Error, ValueError):
    pass


class MissingDepth(MissingInput):
    def __init__(self, view: int):
        self.view = view
        super().__init__(f"depth render for view {view}")


class OutOfBounds(Inpaint360Error, ValueError):
    pass


class PatchTooLarge(Inpaint360Error, ValueError):
    pass
