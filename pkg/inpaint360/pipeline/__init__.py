"""
inpaint360.pipeline

Run configuration, the ten resumable stages, finetuning variants, evaluation
against the empty-scene ground truth and the CLI.
"""

from .config import (
    STAGES,
    VARIANTS,
    EvalConfig,
    ExternalInputs,
    FinetuneConfig,
    PipelineConfig,
    RenderConfig,
    load_config,
)
from .artifacts import RunLayout, fingerprint, hash_file, is_up_to_date
from .evaluate import (
    EvalReport,
    ViewRow,
    ablation_summary,
    evaluate_images,
    floater_mass,
    in_mask_l1,
    inconsistency_scores,
    lpips_proxy,
    psnr,
)
from .finetune import FinetuneFit, build_patch_pool, draw_patches, finetune_field
from .stages import REGISTRY, evaluate, run_all, run_stage

__all__ = [
    "STAGES",
    "VARIANTS",
    "EvalConfig",
    "ExternalInputs",
    "FinetuneConfig",
    "PipelineConfig",
    "RenderConfig",
    "load_config",
    "RunLayout",
    "fingerprint",
    "hash_file",
    "is_up_to_date",
    "EvalReport",
    "ViewRow",
    "ablation_summary",
    "evaluate_images",
    "floater_mass",
    "in_mask_l1",
    "inconsistency_scores",
    "lpips_proxy",
    "psnr",
    "FinetuneFit",
    "build_patch_pool",
    "draw_patches",
    "finetune_field",
    "REGISTRY",
    "evaluate",
    "run_all",
    "run_stage",
]
