"""
inpaint360.perceptual

Patch partitioning, pixel and perceptual losses, and the weighted finetuning
objective.
"""

from .distance import feature_operators, perceptual_distance, perceptual_distances, perceptual_distances_and_grad
from .losses import inpaint_loss, inpaint_loss_patches, pixel_loss, pixel_loss_patches
from .objective import LossBreakdown, LossConfig, PatchBatch, combine_losses, total_loss
from .patches import PatchSet, extract_patches, partition_patches, scatter_patches

__all__ = [
    "LossBreakdown",
    "LossConfig",
    "PatchBatch",
    "PatchSet",
    "combine_losses",
    "extract_patches",
    "feature_operators",
    "inpaint_loss",
    "inpaint_loss_patches",
    "partition_patches",
    "perceptual_distance",
    "perceptual_distances",
    "perceptual_distances_and_grad",
    "pixel_loss",
    "pixel_loss_patches",
    "scatter_patches",
]
