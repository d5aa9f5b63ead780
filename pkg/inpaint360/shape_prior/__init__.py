"""
inpaint360.shape_prior

Occupancy cubes, the procedural shape corpus, the diffusion noise predictor
and the visibility-gated density prior built on it.
"""

from .config import PriorConfig
from .ddpm import (
    DdpmFit,
    ddim_denoise,
    estimate_clean,
    load_denoiser,
    occupancy_iou,
    save_denoiser,
    stack_cubes,
    train_ddpm,
)
from .denoiser import DenoiserNet, timestep_embedding
from .dsds import (
    GeomLossResult,
    candidate_cube_centers,
    dsds_loss,
    geom_loss,
    geom_loss_on_cubes,
    visible_cube_centers,
    visible_points,
)
from .occupancy import OccupancyCube, cube_cell_centers, voxelize
from .schedule import NoiseSchedule, predict_x0, q_sample
from .shapes import (
    SHAPE_FAMILIES,
    ProceduralShape,
    corpus_cubes,
    corpus_document,
    random_shape,
    sample_training_cubes,
    shape_corpus,
    voxelize_shape,
)

__all__ = [
    "DdpmFit",
    "DenoiserNet",
    "GeomLossResult",
    "NoiseSchedule",
    "OccupancyCube",
    "PriorConfig",
    "ProceduralShape",
    "SHAPE_FAMILIES",
    "candidate_cube_centers",
    "corpus_cubes",
    "corpus_document",
    "cube_cell_centers",
    "ddim_denoise",
    "dsds_loss",
    "estimate_clean",
    "geom_loss",
    "geom_loss_on_cubes",
    "load_denoiser",
    "occupancy_iou",
    "predict_x0",
    "q_sample",
    "random_shape",
    "sample_training_cubes",
    "save_denoiser",
    "shape_corpus",
    "stack_cubes",
    "timestep_embedding",
    "train_ddpm",
    "visible_cube_centers",
    "visible_points",
    "voxelize",
    "voxelize_shape",
]
