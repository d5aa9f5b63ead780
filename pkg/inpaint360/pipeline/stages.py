"""
The ten pipeline stages and the resumable runner around them.

Each stage reads only the recorded outputs of its upstream stages, writes
into its own directory under the run root and is skipped when its
fingerprint and outputs are unchanged.
"""

from __future__ import annotations

import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from inpaint360.documents import read_json, write_json
from inpaint360.errors import DimensionMismatch, MissingInput
from inpaint360.field.checkpoint import load_field, save_field
from inpaint360.field.grid import RadianceField
from inpaint360.field.render import render_view
from inpaint360.field.train import fit_field
from inpaint360.geometry.camera import Camera, camera_rays, z_from_ray_depth
from inpaint360.geometry.io import save_cameras
from inpaint360.inpaint360_logging import get_logger
from inpaint360.instrumentation.stage import stage_instrumentation
from inpaint360.metrics.custom import EVAL_METRIC
from inpaint360.metrics.exporters import write_metrics
from inpaint360.scene_synth.boxes import propose_boxes
from inpaint360.scene_synth.inpainter import simulate_inpainting
from inpaint360.scene_synth.io import (
    EmptySceneViews,
    load_dataset,
    load_depth,
    load_empty_scene,
    load_rgb,
    save_dataset,
    save_depth,
    save_rgb,
)
from inpaint360.scene_synth.raytrace import SyntheticDataset, render_ground_truth
from inpaint360.scene_synth.scene import build_cameras, generate_scene
from inpaint360.segment.instruction import parse_instruction
from inpaint360.segment.io import load_maskset, load_union_masks, save_maskset
from inpaint360.segment.masks import mask_iou
from inpaint360.segment.refine import initial_maskset, refine_depth_warp
from inpaint360.segment.segmenter import ExternalSegmenter, OracleSegmenter, Segmenter
from inpaint360.segment.types import MaskSet
from inpaint360.settings import Inpaint360Settings
from inpaint360.shape_prior.ddpm import (
    ddim_denoise,
    estimate_clean,
    load_denoiser,
    occupancy_iou,
    save_denoiser,
    stack_cubes,
    train_ddpm,
)
from inpaint360.shape_prior.denoiser import DenoiserNet
from inpaint360.shape_prior.schedule import NoiseSchedule, q_sample
from inpaint360.shape_prior.shapes import corpus_cubes, corpus_document, sample_training_cubes, shape_corpus
from .artifacts import (
    RunLayout,
    fingerprint,
    gather_inputs,
    hash_document,
    hash_file,
    is_up_to_date,
    require,
    write_stage_manifest,
)
from .config import STAGES, PipelineConfig
from .evaluate import EvalReport, ablation_summary, evaluate_images, floater_mass, psnr
from .finetune import finetune_field

logger = get_logger(__name__)

ACCUMULATION_FLOOR = 0.5
HELDOUT_SHAPES = 4
HELDOUT_CUBES_PER_SHAPE = 8
REFERENCE_NAME = "retrain"
PER_FRAME_NAME = "per-frame"
CONFIG_NAME = "config.json"


@dataclass
class StageContext:
    cfg: PipelineConfig
    layout: RunLayout
    workers: int

    def out(self, stage: str) -> Path:
        return self.layout.stage_dir(stage)

    def dataset(self) -> SyntheticDataset:
        return load_dataset(require(self.out("synth") / "manifest.json", "run the synth stage first").parent)

    def empty_scene(self) -> EmptySceneViews:
        return load_empty_scene(require(self.out("synth") / "manifest.json", "run the synth stage first").parent)


@dataclass(frozen=True)
class StageDef:
    name: str
    run: Callable[[StageContext], None]
    upstream: tuple[str, ...]
    section: Callable[[PipelineConfig], object]
    external: Callable[[PipelineConfig], Sequence[Optional[Path]]] = lambda cfg: ()


def _dump(model) -> object:
    return model.model_dump(mode="json")


def rendered_z_depth(field: RadianceField, cam: Camera, num_samples: int) -> tuple[np.ndarray, np.ndarray]:
    """Rendered colour and z-depth; pixels with accumulation below one half have no depth (inf)."""
    view = render_view(field, cam, num_samples)
    _, directions = camera_rays(cam)
    z = z_from_ray_depth(cam, directions, view.depth)
    return view.rgb, np.where(view.accumulation >= ACCUMULATION_FLOOR, z, np.inf)


def save_field_renders(field: RadianceField, cameras: Mapping[int, Camera], directory: Path, num_samples: int,
                       with_depth: bool = True) -> None:
    for view in sorted(cameras):
        rgb, z = rendered_z_depth(field, cameras[view], num_samples)
        save_rgb(directory / "rgb" / f"{view:03d}.png", rgb)
        if with_depth:
            save_depth(directory / "depth" / f"{view:03d}.png", directory / "depth" / f"{view:03d}_valid.png", z)


def load_depths(directory: Path, views: Sequence[int]) -> dict[int, np.ndarray]:
    return {
        view: load_depth(directory / f"{view:03d}.png", directory / f"{view:03d}_valid.png")
        for view in views
    }


def load_images(directory: Path, views: Sequence[int]) -> dict[int, np.ndarray]:
    images = {}
    for view in views:
        images[view] = load_rgb(require(directory / f"{view:03d}.png", f"image for view {view}"))
    return images


def _write_curve(path: Path, curve) -> None:
    write_json(path, [{"iteration": it, "loss": loss} for it, loss in curve])


# stages


def run_synth(ctx: StageContext) -> None:
    spec = ctx.cfg.resolved_scene()
    scene, cameras = generate_scene(spec, ctx.cfg.seed)
    dataset = render_ground_truth(scene, cameras, workers=ctx.workers)
    save_dataset(dataset, ctx.out("synth"))
    logger.info("synthesized {} views of {} primitives", len(cameras), len(scene.primitives))


def run_train(ctx: StageContext) -> None:
    dataset = ctx.dataset()
    out = ctx.out("train")
    fit = fit_field(dataset.images(), None, dataset.cameras, ctx.cfg.field, workers=ctx.workers, stage="train")
    save_field(fit.field, out / "field.ckpt")
    _write_curve(out / "loss_curve.json", fit.curve)
    save_field_renders(fit.field, dataset.cameras, out, ctx.cfg.field.num_samples)
    rendered = load_images(out / "rgb", dataset.view_indices)
    scores = {str(v): psnr(rendered[v], dataset.views[v].rgb) for v in dataset.view_indices}
    write_json(out / "train_report.json", {"psnr": scores, "mean_psnr": float(np.mean(list(scores.values())))})


def _segmenter(ctx: StageContext, dataset: SyntheticDataset) -> Segmenter:
    external = ctx.cfg.external
    if external.masks_dir is not None:
        logger.info("using external masks from {}", external.masks_dir)
        return ExternalSegmenter(external.masks_dir, external.prompts_dir)
    return OracleSegmenter({v: dataset.views[v].ids for v in dataset.view_indices})


def run_segment(ctx: StageContext) -> None:
    dataset = ctx.dataset()
    instruction = parse_instruction(ctx.cfg.instruction)
    boxes = {
        view: propose_boxes(dataset.scene, view, dataset.views[view].ids, instruction.objects, ctx.cfg.boxes, ctx.cfg.seed)
        for view in dataset.view_indices
    }
    shape = dataset.views[dataset.view_indices[0]].ids.shape
    id_maps = {v: dataset.views[v].ids for v in dataset.view_indices}
    maskset = initial_maskset(boxes, len(instruction.objects), shape, _segmenter(ctx, dataset), id_maps)
    out = ctx.out("segment")
    save_maskset(maskset, out)
    write_json(out / "instruction.json", {"text": instruction.text, "objects": list(instruction.objects)})
    logger.info("segmented {} views, mean mask area {:.1f}", len(maskset.views), maskset.mean_area())


def target_masks(dataset: SyntheticDataset, objects: Sequence[str]) -> dict[int, np.ndarray]:
    """Ground-truth union masks of the named objects, used for diagnostics only."""
    ids = [dataset.scene.by_name(name).instance_id for name in objects]
    return {v: np.isin(dataset.views[v].ids, ids) for v in dataset.view_indices}


def _mean_iou(maskset: MaskSet, truth: Mapping[int, np.ndarray]) -> float:
    return float(np.mean([mask_iou(maskset.union(v), truth[v]) for v in maskset.views]))


def run_refine_masks(ctx: StageContext) -> None:
    dataset = ctx.dataset()
    maskset = load_maskset(ctx.out("segment"))
    instruction = read_json(ctx.out("segment") / "instruction.json")
    depths = load_depths(ctx.out("train") / "depth", dataset.view_indices)
    z_tol = ctx.cfg.refine.z_tol
    if z_tol is None:
        z_tol = 2.0 * load_field(ctx.out("train") / "field.ckpt").voxel_diagonal
    truth = target_masks(dataset, instruction["objects"])
    rounds = [{"round": 0, "mean_area": maskset.mean_area(), "mean_iou": _mean_iou(maskset, truth), "prompts_added": 0}]

    def on_round(index: int, current: MaskSet) -> None:
        stats = current.history[-1]
        rounds.append({
            "round": index,
            "mean_area": stats.mean_area,
            "mean_iou": _mean_iou(current, truth),
            "prompts_added": stats.prompts_added,
        })

    refined = refine_depth_warp(
        maskset, depths, dataset.cameras, ctx.cfg.refine, _segmenter(ctx, dataset),
        z_tol=z_tol, workers=ctx.workers, on_round=on_round,
    )
    out = ctx.out("refine-masks")
    save_maskset(refined, out)
    write_json(out / "refine_report.json", {"z_tol": z_tol, "rounds": rounds})
    logger.info("mask IoU vs ground truth {:.3f} -> {:.3f}", rounds[0]["mean_iou"], rounds[-1]["mean_iou"])


def run_inpaint(ctx: StageContext) -> None:
    dataset = ctx.dataset()
    masks = load_union_masks(ctx.out("refine-masks") / "masks", dataset.view_indices)
    inpainted_dir = ctx.cfg.external.inpainted_dir
    if inpainted_dir is not None:
        logger.info("using external inpainted images from {}", inpainted_dir)
        images = load_images(Path(inpainted_dir), dataset.view_indices)
        for view, image in images.items():
            if image.shape != dataset.views[view].rgb.shape:
                raise DimensionMismatch(f"inpainted view {view} has shape {image.shape}")
    else:
        images = simulate_inpainting(dataset, masks, ctx.cfg.inpainter)
    for view in sorted(images):
        save_rgb(ctx.out("inpaint") / "rgb" / f"{view:03d}.png", images[view])


def run_retrain(ctx: StageContext) -> None:
    dataset = ctx.dataset()
    images = load_images(ctx.out("inpaint") / "rgb", dataset.view_indices)
    out = ctx.out("retrain")
    fit = fit_field(images, None, dataset.cameras, ctx.cfg.retrain_config(), workers=ctx.workers, stage="retrain")
    save_field(fit.field, out / "field.ckpt")
    _write_curve(out / "loss_curve.json", fit.curve)
    save_field_renders(fit.field, dataset.cameras, out, ctx.cfg.field.num_samples)


def run_prior_train(ctx: StageContext) -> None:
    prior = ctx.cfg.prior
    out = ctx.out("prior-train")
    shapes, cubes = corpus_cubes(prior)
    write_json(out / "corpus.json", corpus_document(shapes, prior))
    schedule = NoiseSchedule()
    net = DenoiserNet(base_channels=prior.base_channels, seed=prior.seed)
    fit = train_ddpm(cubes, net, schedule, prior.train_steps, prior, workers=ctx.workers)
    save_denoiser(net, out / "denoiser.ckpt", schedule)
    _write_curve(out / "loss_curve.json", fit.curve)

    heldout = []
    for index, shape in enumerate(shape_corpus(HELDOUT_SHAPES, prior.seed + 1)):
        heldout.extend(sample_training_cubes(shape, prior, seed=prior.seed * 7919 + 10007 + index)[:HELDOUT_CUBES_PER_SHAPE])
    clean = stack_cubes(heldout).astype(np.float64)
    rng = np.random.default_rng([prior.seed, 0])
    eps = rng.standard_normal(clean.shape)
    x_t = q_sample(clean, prior.t_star, eps, schedule)
    one_shot = estimate_clean(net, x_t, prior.t_star, schedule)
    reverse = ddim_denoise(net, x_t, prior.t_star, schedule)
    eps_pred = net(x_t, prior.t_star).astype(np.float64)
    write_json(out / "prior_report.json", {
        "final_train_loss": fit.final_loss,
        "heldout_cubes": int(clean.shape[0]),
        "heldout_noise_mse": float(np.mean((eps_pred - eps) ** 2)),
        "zero_predictor_mse": float(np.mean(eps ** 2)),
        "one_shot_iou": float(np.mean([occupancy_iou(a, b) for a, b in zip(one_shot, clean)])),
        "ddim_iou": float(np.mean([occupancy_iou(a, b) for a, b in zip(reverse, clean)])),
        "t_star": prior.t_star,
    })


def run_finetune(ctx: StageContext) -> None:
    dataset = ctx.dataset()
    views = dataset.view_indices
    images = load_images(ctx.out("inpaint") / "rgb", views)
    masks = load_union_masks(ctx.out("refine-masks") / "masks", views)
    depths = load_depths(ctx.out("retrain") / "depth", views)
    init = load_field(ctx.out("retrain") / "field.ckpt")
    net, schedule = load_denoiser(ctx.out("prior-train") / "denoiser.ckpt")
    for variant in ctx.cfg.finetune.variants:
        fit = finetune_field(
            variant, init, images, masks, dataset.cameras, depths, net, schedule,
            ctx.cfg.finetune, ctx.cfg.loss, ctx.cfg.prior, seed=ctx.cfg.seed,
        )
        out = ctx.out("finetune") / variant
        save_field(fit.field, out / "field.ckpt")
        write_json(out / "loss_curve.json", fit.curve)


def field_checkpoints(ctx: StageContext) -> dict[str, Path]:
    """Every field the render and eval stages report on: the retrained field plus each variant."""
    fields = {REFERENCE_NAME: ctx.out("retrain") / "field.ckpt"}
    for variant in ctx.cfg.finetune.variants:
        fields[variant] = ctx.out("finetune") / variant / "field.ckpt"
    return fields


def orbit_cameras(ctx: StageContext, dataset: SyntheticDataset) -> dict[int, Camera]:
    """Novel poses on the training rig, offset by half the training azimuth spacing."""
    rig = ctx.cfg.resolved_scene().cameras
    spacing = (360.0 if rig.layout == "ring" else rig.arc_deg) / max(rig.num_views, 1)
    orbit = rig.model_copy(update={"num_views": ctx.cfg.render.orbit_views, "azimuth_deg": rig.azimuth_deg + spacing / 2.0})
    return build_cameras(orbit, np.asarray(dataset.scene.centroid))


def run_render(ctx: StageContext) -> None:
    dataset = ctx.dataset()
    orbit = orbit_cameras(ctx, dataset) if ctx.cfg.render.orbit_views else {}
    for name, path in field_checkpoints(ctx).items():
        field = load_field(require(path))
        out = ctx.out("render") / name
        save_field_renders(field, dataset.cameras, out, ctx.cfg.render.num_samples, with_depth=False)
        if orbit:
            save_field_renders(field, orbit, out / "orbit", ctx.cfg.render.num_samples, with_depth=False)
    if orbit:
        save_cameras(ctx.out("render") / "orbit_cameras.json", orbit)


def run_eval(ctx: StageContext) -> None:
    reports = _evaluate(ctx)
    out = ctx.out("eval")
    reference_mass = None
    if ctx.cfg.eval.reference_field:
        reference_mass = _reference_floater_mass(ctx)
    for name, report in reports.items():
        write_json(out / f"report_{name}.json", report.to_document())
        for metric, value in report.aggregate.items():
            EVAL_METRIC.labels(variant=name, metric=metric).set(value)
    variants = {k: v for k, v in reports.items() if k in ctx.cfg.finetune.variants}
    summary = ablation_summary(variants, reference_mass)
    summary["baselines"] = {k: reports[k].aggregate for k in (REFERENCE_NAME, PER_FRAME_NAME) if k in reports}
    write_json(out / "ablation.json", summary)


def evaluate(run_dir: Union[str, Path], cfg: Optional[PipelineConfig] = None) -> dict[str, EvalReport]:
    """
    Reports for a finished run: one per rendered field plus the per-frame
    inpainting baseline.

    Without ``cfg`` the config recorded in the run directory is used.
    """
    run_dir = Path(run_dir)
    if cfg is None:
        cfg = PipelineConfig.model_validate(read_json(require(run_dir / CONFIG_NAME, "run configuration")))
    cfg = cfg.model_copy(update={"output_dir": run_dir})
    return _evaluate(StageContext(cfg=cfg, layout=RunLayout(run_dir), workers=cfg.workers))


def _evaluate(ctx: StageContext) -> dict[str, EvalReport]:
    """Reads the empty-scene images and depths only, never the removed objects' appearance."""
    truth = ctx.empty_scene()
    views = truth.view_indices
    cameras = truth.cameras
    masks = load_union_masks(ctx.out("refine-masks") / "masks", views)
    empty_images = truth.rgb
    empty_depths = truth.depth
    eval_cfg = ctx.cfg.eval

    def score(name: str, images: Mapping[int, np.ndarray]) -> EvalReport:
        return evaluate_images(
            name, images, empty_images, masks, cameras, empty_depths,
            eval_cfg.patch_size, eval_cfg.reprojection_tolerance,
        )

    reports = {PER_FRAME_NAME: score(PER_FRAME_NAME, load_images(ctx.out("inpaint") / "rgb", views))}
    for name, path in field_checkpoints(ctx).items():
        report = score(name, load_images(ctx.out("render") / name / "rgb", views))
        report.floater_mass, report.out_of_region_mass = floater_mass(
            load_field(path), masks, cameras, empty_depths, eval_cfg.floater_margin, eval_cfg.density_floor
        )
        reports[name] = report
    for report in reports.values():
        report.check_finite()
        logger.info("{}: {}", report.variant, {k: round(v, 5) for k, v in report.aggregate.items()})
    return reports


def _reference_field(ctx: StageContext, truth: EmptySceneViews) -> RadianceField:
    """
    A field fitted to the empty-scene renders. The fit is cached under
    ``<out>/cache`` and reused while the synth outputs and the fit config match.
    """
    config = ctx.cfg.field
    if ctx.cfg.eval.reference_iterations is not None:
        config = config.model_copy(update={"iterations": ctx.cfg.eval.reference_iterations})
    key = hash_document({"field": _dump(config), "synth": hash_file(ctx.layout.manifest_path("synth"))})
    path = ctx.layout.cache_dir / "reference_field.ckpt"
    stamp = ctx.layout.cache_dir / "reference_field.json"
    if path.exists() and stamp.exists() and read_json(stamp).get("fingerprint") == key:
        logger.info("reusing reference field {}", ctx.layout.relative(path))
        return load_field(path)
    field = fit_field(truth.rgb, None, truth.cameras, config, workers=ctx.workers, stage="eval").field
    save_field(field, path)
    write_json(stamp, {"fingerprint": key})
    return load_field(path)


def _reference_floater_mass(ctx: StageContext) -> float:
    """Floater mass of the empty-scene reference field; the checkpoint is also copied into the eval outputs."""
    truth = ctx.empty_scene()
    field = _reference_field(ctx, truth)
    save_field(field, ctx.out("eval") / "reference_field.ckpt")
    masks = load_union_masks(ctx.out("refine-masks") / "masks", truth.view_indices)
    mass, _ = floater_mass(field, masks, truth.cameras, truth.depth, ctx.cfg.eval.floater_margin, ctx.cfg.eval.density_floor)
    return mass


def _external(*paths):
    return lambda cfg: tuple(getattr(cfg.external, p) for p in paths)


REGISTRY: dict[str, StageDef] = {
    "synth": StageDef("synth", run_synth, (), lambda c: {"scene": _dump(c.resolved_scene())}),
    "train": StageDef("train", run_train, ("synth",), lambda c: _dump(c.field)),
    "segment": StageDef(
        "segment", run_segment, ("synth",),
        lambda c: {"instruction": c.instruction, "boxes": _dump(c.boxes)},
        _external("masks_dir"),
    ),
    "refine-masks": StageDef(
        "refine-masks", run_refine_masks, ("synth", "train", "segment"),
        lambda c: _dump(c.refine), _external("masks_dir"),
    ),
    "inpaint": StageDef(
        "inpaint", run_inpaint, ("synth", "refine-masks"),
        lambda c: _dump(c.inpainter), _external("inpainted_dir"),
    ),
    "retrain": StageDef("retrain", run_retrain, ("synth", "inpaint"), lambda c: _dump(c.retrain_config())),
    "prior-train": StageDef("prior-train", run_prior_train, (), lambda c: _dump(c.prior)),
    "finetune": StageDef(
        "finetune", run_finetune, ("synth", "refine-masks", "inpaint", "retrain", "prior-train"),
        lambda c: {"finetune": _dump(c.finetune), "loss": _dump(c.loss), "prior": _dump(c.prior)},
    ),
    "render": StageDef(
        "render", run_render, ("synth", "retrain", "finetune"),
        lambda c: {"render": _dump(c.render), "variants": list(c.finetune.variants), "scene": _dump(c.resolved_scene().cameras)},
    ),
    "eval": StageDef(
        "eval", run_eval, ("synth", "refine-masks", "inpaint", "retrain", "finetune", "render"),
        lambda c: {"eval": _dump(c.eval), "field": _dump(c.field), "variants": list(c.finetune.variants)},
    ),
}


def external_hashes(directories: Sequence[Optional[Path]]) -> dict[str, str]:
    """sha256 of every file in the external input directories; they must exist when configured."""
    hashes = {}
    for directory in directories:
        if directory is None:
            continue
        directory = Path(directory)
        if not directory.is_dir():
            raise MissingInput(str(directory), "configured external input directory")
        for path in sorted(p for p in directory.rglob("*") if p.is_file()):
            hashes[f"external:{path.as_posix()}"] = hash_file(path)
    return hashes


def _update_run_manifest(layout: RunLayout, cfg: PipelineConfig, stage: str, stage_fingerprint: str) -> None:
    path = layout.run_manifest
    manifest = read_json(path) if path.exists() else {"version": 1, "stages": {}}
    manifest["seeds"] = cfg.seeds()
    manifest["config_hash"] = hash_document(cfg.model_dump(mode="json", exclude={"output_dir", "workers"}))
    manifest["stages"][stage] = stage_fingerprint
    write_json(path, manifest)
    write_json(layout.root / CONFIG_NAME, cfg.model_dump(mode="json", exclude={"output_dir", "workers"}))


def run_stage(
    name: str,
    cfg: PipelineConfig,
    force: bool = False,
    settings: Optional[Inpaint360Settings] = None,
) -> str:
    """
    Run one stage; returns ``"ran"`` or ``"skipped"`` (already up to date).

    Raises ``MissingInput`` naming the first absent upstream artifact.
    """
    if name not in REGISTRY:
        raise KeyError(f"unknown stage {name!r}; choose from {list(STAGES)}")
    settings = settings or Inpaint360Settings()
    definition = REGISTRY[name]
    layout = RunLayout(Path(cfg.output_dir))

    @stage_instrumentation(name, settings)
    def execute() -> str:
        inputs = gather_inputs(layout, definition.upstream)
        inputs.update(external_hashes(definition.external(cfg)))
        seed = cfg.seed
        stage_fingerprint = fingerprint(name, definition.section(cfg), seed, inputs)
        if not force and is_up_to_date(layout, name, stage_fingerprint):
            logger.info("stage {} is up to date, skipping", name)
            return "skipped"
        stage_dir = layout.stage_dir(name)
        if stage_dir.exists():
            shutil.rmtree(stage_dir)
        stage_dir.mkdir(parents=True)
        with logger.contextualize(stage=name):
            logger.info("running stage {}", name)
            definition.run(StageContext(cfg=cfg, layout=layout, workers=cfg.workers))
        write_stage_manifest(layout, name, stage_fingerprint, seed, inputs)
        _update_run_manifest(layout, cfg, name, stage_fingerprint)
        return "ran"

    try:
        return execute()
    finally:
        if settings.metrics_enabled:
            write_metrics(layout.root / settings.metrics_filename)


def run_all(cfg: PipelineConfig, force: bool = False, settings: Optional[Inpaint360Settings] = None) -> dict[str, str]:
    """Run the configured stages in pipeline order."""
    results = {}
    for name in STAGES:
        if name in cfg.stages:
            results[name] = run_stage(name, cfg, force=force, settings=settings)
    return results
