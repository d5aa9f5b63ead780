"""
inpaint360.field

Differentiable dense-voxel radiance field: sampling, compositing, explicit
backward pass, Adam, photometric training and checkpoints.
"""

from .grid import RadianceField, TrilinearLookup, inverse_softplus, softplus, trilinear_lookup
from .render import (
    DEFAULT_SAMPLES,
    RaySampleBatch,
    RenderResult,
    SampleGradients,
    ViewRender,
    backward,
    backward_samples,
    composite,
    intersect_aabb,
    render_ray,
    render_rays,
    render_view,
    sample_ray,
    sample_rays,
)
from .optim import OptimizerState, adam_update, optimizer_step
from .train import FieldConfig, FieldFit, build_ray_pool, fit_field, l1_ray_loss, train_field
from .checkpoint import load_checkpoint, load_field, save_checkpoint, save_field

__all__ = [
    "RadianceField",
    "TrilinearLookup",
    "inverse_softplus",
    "softplus",
    "trilinear_lookup",
    "DEFAULT_SAMPLES",
    "RaySampleBatch",
    "RenderResult",
    "SampleGradients",
    "ViewRender",
    "backward",
    "backward_samples",
    "composite",
    "intersect_aabb",
    "render_ray",
    "render_rays",
    "render_view",
    "sample_ray",
    "sample_rays",
    "OptimizerState",
    "adam_update",
    "optimizer_step",
    "FieldConfig",
    "FieldFit",
    "build_ray_pool",
    "fit_field",
    "l1_ray_loss",
    "train_field",
    "load_checkpoint",
    "load_field",
    "save_checkpoint",
    "save_field",
]
