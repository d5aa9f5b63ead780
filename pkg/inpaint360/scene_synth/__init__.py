"""
inpaint360.scene_synth

Procedural scenes, analytic ground truth, oracle box proposals and the
simulated 2D inpainter.
"""

from .boxes import BoxFailureConfig, propose_boxes, tight_box, truncate_box
from .inpainter import InpainterPerturbation, simulate_inpainting
from .io import (
    DEPTH_SCALE,
    depth_scale_for,
    EmptySceneViews,
    load_dataset,
    load_depth,
    load_empty_scene,
    load_ids,
    load_mask,
    load_rgb,
    save_dataset,
    save_depth,
    save_ids,
    save_mask,
    save_rgb,
)
from .primitives import BACKGROUND_ID, ScenePrimitive
from .raytrace import SyntheticDataset, ViewData, render_ground_truth, trace_rays
from .scene import CameraRigConfig, PrimitiveSpec, Scene, SceneSpec, build_cameras, generate_scene

__all__ = [
    "BACKGROUND_ID",
    "BoxFailureConfig",
    "CameraRigConfig",
    "DEPTH_SCALE",
    "depth_scale_for",
    "EmptySceneViews",
    "InpainterPerturbation",
    "PrimitiveSpec",
    "Scene",
    "ScenePrimitive",
    "SceneSpec",
    "SyntheticDataset",
    "ViewData",
    "build_cameras",
    "generate_scene",
    "load_dataset",
    "load_depth",
    "load_empty_scene",
    "load_ids",
    "load_mask",
    "load_rgb",
    "propose_boxes",
    "render_ground_truth",
    "save_dataset",
    "save_depth",
    "save_ids",
    "save_mask",
    "save_rgb",
    "simulate_inpainting",
    "tight_box",
    "trace_rays",
    "truncate_box",
]
