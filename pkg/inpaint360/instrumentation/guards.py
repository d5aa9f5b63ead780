from typing import Optional

import numpy as np

from inpaint360.errors import NumericalFailure
from inpaint360.metrics.custom import NUMERICAL_FAILURES_TOTAL


class NumericalGuard:
    """Abort an optimization loop the moment a loss or gradient stops being finite."""

    def __init__(self, stage: str):
        self.stage = stage

    def check(self, value, iteration: Optional[int] = None, what: str = "loss") -> None:
        if np.all(np.isfinite(value)):
            return
        NUMERICAL_FAILURES_TOTAL.labels(stage=self.stage).inc()
        raise NumericalFailure(self.stage, iteration, what)
