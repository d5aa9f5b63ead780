"""
inpaint360.segment

Instruction parsing, box-seeded prompting, oracle/external segmentation and
depth-warping refinement into view-consistent masks.
"""

from .instruction import parse_instruction
from .io import load_maskset, load_prompts, load_union_masks, save_maskset, save_prompts
from .masks import mask_iou, union_masks
from .prompts import PROMPTS_PER_BOX, box_majority_id, seed_prompts_from_box
from .refine import backproject_pixels, initial_maskset, refine_depth_warp
from .segmenter import ExternalSegmenter, OracleSegmenter, Segmenter, oracle_segment
from .types import BoxProposal, Instruction, MaskSet, PointPrompt, RefineConfig, RoundStats

__all__ = [
    "BoxProposal",
    "ExternalSegmenter",
    "Instruction",
    "MaskSet",
    "OracleSegmenter",
    "PROMPTS_PER_BOX",
    "PointPrompt",
    "RefineConfig",
    "RoundStats",
    "Segmenter",
    "backproject_pixels",
    "box_majority_id",
    "initial_maskset",
    "load_maskset",
    "load_prompts",
    "load_union_masks",
    "mask_iou",
    "oracle_segment",
    "parse_instruction",
    "refine_depth_warp",
    "save_maskset",
    "save_prompts",
    "seed_prompts_from_box",
    "union_masks",
]
