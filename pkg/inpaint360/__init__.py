"""
inpaint360 - remove text-specified objects from a voxel radiance field.

A CPU-only, reproducible pipeline: synthetic scenes with paired empty-scene
ground truth, view-consistent segmentation by depth warping, a learned 3D
occupancy prior against floaters and perceptual patch finetuning.
"""

from .settings import Inpaint360Settings
from .errors import ConfigError, Inpaint360Error, MissingInput, NumericalFailure
from .inpaint360_logging import get_logger, setup_logger
from .tracing import get_tracer, setup_tracer

__version__ = "0.3.0"

__all__ = [
    "Inpaint360Settings",
    "ConfigError",
    "Inpaint360Error",
    "MissingInput",
    "NumericalFailure",
    "get_logger",
    "setup_logger",
    "get_tracer",
    "setup_tracer",
    "__version__",
]
