"""
Run configuration: one JSON document holding every module's knobs.

Everything has a default, so ``{}`` is a valid config for the default
flowerpot scene. CLI flags ``--seed``, ``--out`` and ``--workers`` override
the document.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError, field_validator

from inpaint360.documents import read_json
from inpaint360.errors import ConfigError
from inpaint360.field.train import FieldConfig
from inpaint360.perceptual.objective import LossConfig
from inpaint360.scene_synth.boxes import BoxFailureConfig
from inpaint360.scene_synth.inpainter import InpainterPerturbation
from inpaint360.scene_synth.scene import SceneSpec
from inpaint360.segment.types import RefineConfig
from inpaint360.shape_prior.config import PriorConfig

STAGES = (
    "synth",
    "train",
    "segment",
    "refine-masks",
    "inpaint",
    "retrain",
    "prior-train",
    "finetune",
    "render",
    "eval",
)

Variant = Literal["base", "in", "geom", "full"]
VARIANTS: tuple[Variant, ...] = ("base", "in", "geom", "full")


class FinetuneConfig(BaseModel):
    iterations: int = Field(1000, ge=0)
    patches_per_step: int = Field(8, ge=1)
    # share of each batch drawn from patches that contain inpainted pixels
    inpainted_share: float = Field(0.5, ge=0, le=1)
    geom_every: int = Field(1, ge=1)
    lr: float = Field(0.02, gt=0)
    num_samples: int = Field(192, ge=1)
    log_every: int = Field(50, ge=1)
    variants: list[Variant] = Field(default_factory=lambda: list(VARIANTS))

    def weights(self, variant: Variant, loss: LossConfig) -> LossConfig:
        """Loss weights of ``variant``: each ablation switches a term on or off."""
        return loss.model_copy(
            update={
                "lambda_geom": loss.lambda_geom if variant in ("geom", "full") else 0.0,
                "lambda_in": loss.lambda_in if variant in ("in", "full") else 0.0,
            }
        )


class RenderConfig(BaseModel):
    num_samples: int = Field(192, ge=1)
    orbit_views: int = Field(0, ge=0)


class EvalConfig(BaseModel):
    # world units in front of the empty-scene surface still counted as free space
    floater_margin: float = Field(0.05, ge=0)
    density_floor: float = Field(0.0, ge=0)
    reprojection_tolerance: float = Field(0.05, gt=0)
    reference_field: bool = False
    reference_iterations: Optional[int] = Field(None, ge=0)
    patch_size: int = Field(16, ge=1)


class ExternalInputs(BaseModel):
    masks_dir: Optional[Path] = None
    prompts_dir: Optional[Path] = None
    inpainted_dir: Optional[Path] = None


class PipelineConfig(BaseModel):
    instruction: str = "Remove the flowerpot and flowers"
    scene: SceneSpec = Field(default_factory=SceneSpec)
    scene_spec_path: Optional[Path] = None
    seed: int = 0
    output_dir: Path = Path("runs/default")
    workers: int = Field(1, ge=1)
    stages: list[str] = Field(default_factory=lambda: list(STAGES))

    field: FieldConfig = Field(default_factory=FieldConfig)
    retrain_iterations: Optional[int] = Field(None, ge=0)
    boxes: BoxFailureConfig = Field(default_factory=lambda: BoxFailureConfig(q_trunc=0.3))
    refine: RefineConfig = Field(default_factory=RefineConfig)
    inpainter: InpainterPerturbation = Field(default_factory=InpainterPerturbation)
    prior: PriorConfig = Field(default_factory=PriorConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    finetune: FinetuneConfig = Field(default_factory=FinetuneConfig)
    render: RenderConfig = Field(default_factory=RenderConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    external: ExternalInputs = Field(default_factory=ExternalInputs)

    @field_validator("stages")
    @classmethod
    def _known_stages(cls, value: list[str]) -> list[str]:
        unknown = sorted(set(value) - set(STAGES))
        if unknown:
            raise ValueError(f"unknown stages {unknown}; choose from {list(STAGES)}")
        return value

    def resolved_scene(self) -> SceneSpec:
        if self.scene_spec_path is None:
            return self.scene
        try:
            return SceneSpec.model_validate(read_json(self.scene_spec_path))
        except ValidationError as exc:
            raise ConfigError(f"{self.scene_spec_path}: {exc}") from exc

    def with_overrides(
        self, seed: Optional[int] = None, output_dir: Union[str, Path, None] = None, workers: Optional[int] = None
    ) -> "PipelineConfig":
        """Apply CLI overrides; a new seed is propagated to every module seed."""
        update = {}
        if seed is not None:
            update.update(
                seed=seed,
                field=self.field.model_copy(update={"seed": seed}),
                refine=self.refine.model_copy(update={"seed": seed}),
                inpainter=self.inpainter.model_copy(update={"seed": seed}),
                prior=self.prior.model_copy(update={"seed": seed}),
            )
        if output_dir is not None:
            update["output_dir"] = Path(output_dir)
        if workers is not None:
            update["workers"] = workers
        return self.model_copy(update=update)

    def retrain_config(self) -> FieldConfig:
        if self.retrain_iterations is None:
            return self.field
        return self.field.model_copy(update={"iterations": self.retrain_iterations})

    def seeds(self) -> dict[str, int]:
        return {
            "run": self.seed,
            "field": self.field.seed,
            "refine": self.refine.seed,
            "inpainter": self.inpainter.seed,
            "prior": self.prior.seed,
        }


def load_config(path: Union[str, Path, None]) -> PipelineConfig:
    """Read and validate a config document; every problem surfaces as ``ConfigError``."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        return PipelineConfig.model_validate(read_json(path))
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
