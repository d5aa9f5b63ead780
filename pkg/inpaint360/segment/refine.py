"""
Multi-view mask refinement by depth warping.

Each round, every target view borrows in-mask pixels from a few other views,
lifts them to 3D with the rendered depth, and turns the ones that land
outside its own mask into new point prompts. Rounds are barriers: prompts
found in round k are visible to the segmenter only from round k+1 on.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Mapping, Optional

import numpy as np
from opentelemetry import trace

from inpaint360.errors import EmptyPrompts, MissingDepth
from inpaint360.geometry.camera import Camera, in_bounds, pixels_to_rays, project_points, ray_depth_from_z
from inpaint360.inpaint360_logging import get_logger
from inpaint360.metrics.custom import REFINE_MEAN_MASK_AREA, REFINE_PROMPTS_ADDED_TOTAL
from .prompts import seed_prompts_from_box
from .segmenter import Segmenter
from .types import BoxProposal, MaskSet, PointPrompt, RefineConfig, RoundStats

logger = get_logger(__name__)
tracer = trace.get_tracer(__name__)

DEPTH_PERCENTILE = 90.0


def backproject_pixels(cam: Camera, rows: np.ndarray, cols: np.ndarray, z: np.ndarray) -> np.ndarray:
    """World points behind pixel centers ``(rows, cols)`` at z-depth ``z``."""
    origins, directions = pixels_to_rays(cam, cols + 0.5, rows + 0.5)
    t = ray_depth_from_z(cam, directions, z)
    return origins + t[..., None] * directions


def initial_maskset(
    boxes: Mapping[int, list[BoxProposal]],
    num_objects: int,
    shape: tuple[int, int],
    segmenter: Segmenter,
    id_maps: Optional[Mapping[int, np.ndarray]] = None,
) -> MaskSet:
    """Seed prompts from every box and segment once; views without a box start empty."""
    masks, prompts = {}, {}
    for view in sorted(boxes):
        masks[view] = {q: np.zeros(shape, dtype=bool) for q in range(num_objects)}
        prompts[view] = {q: [] for q in range(num_objects)}
        for box in boxes[view]:
            seeds = seed_prompts_from_box(box, id_maps.get(view) if id_maps else None, view)
            prompts[view][box.object_index] = seeds
            try:
                masks[view][box.object_index] = segmenter.segment(view, box.object_index, seeds, box)
            except EmptyPrompts:
                logger.warning("view {} object {}: every seed prompt was filtered out", view, box.object_index)
    return MaskSet(masks=masks, prompts=prompts, boxes={v: list(b) for v, b in boxes.items()})


def _warp_into(
    target: int,
    sources: list[int],
    object_index: int,
    snapshot: MaskSet,
    depths: Mapping[int, np.ndarray],
    cameras: Mapping[int, Camera],
    cfg: RefineConfig,
    z_tol: float,
    round_index: int,
) -> list[PointPrompt]:
    """Prompts gained by ``target`` for one object from one round of warping."""
    cam_t = cameras[target]
    mask_t = snapshot.masks[target][object_index]
    depth_t = depths[target]
    taken = {p.pixel for p in snapshot.prompts[target][object_index]}
    gained = []
    for source in sources:
        mask_s = snapshot.masks[source][object_index]
        rows, cols = np.nonzero(mask_s)
        if rows.size == 0:
            continue
        rng = np.random.default_rng([cfg.seed, round_index, target, source, object_index])
        pick = rng.choice(rows.size, size=min(cfg.rays_per_view, rows.size), replace=False)
        rows, cols = rows[pick], cols[pick]
        depth_s = depths[source]
        in_mask_depth = depth_s[mask_s]
        in_mask_depth = in_mask_depth[np.isfinite(in_mask_depth)]
        if in_mask_depth.size == 0:
            continue
        tau = cfg.tau_pct * np.percentile(in_mask_depth, DEPTH_PERCENTILE)
        z_s = depth_s[rows, cols]
        keep = np.isfinite(z_s) & (z_s > 0) & (z_s <= tau)
        if not keep.any():
            continue
        points = backproject_pixels(cameras[source], rows[keep], cols[keep], z_s[keep])
        u, v, z = project_points(cam_t, points)
        visible = np.isfinite(z) & in_bounds(cam_t, u, v)
        for uu, vv, zz in zip(u[visible], v[visible], z[visible]):
            row, col = int(np.floor(vv)), int(np.floor(uu))
            if mask_t[row, col] or (row, col) in taken:
                continue
            # NaN or inf target depth fails the occlusion test
            if not abs(zz - depth_t[row, col]) <= z_tol:
                continue
            taken.add((row, col))
            gained.append(
                PointPrompt(u=col + 0.5, v=row + 0.5, source="warped", origin_view=source, object_index=object_index)
            )
    return gained


def refine_depth_warp(
    maskset: MaskSet,
    depths: Mapping[int, np.ndarray],
    cameras: Mapping[int, Camera],
    cfg: RefineConfig,
    segmenter: Segmenter,
    z_tol: Optional[float] = None,
    workers: int = 1,
    on_round: Optional[Callable[[int, MaskSet], None]] = None,
) -> MaskSet:
    """
    Grow ``maskset`` with warped prompts for up to ``cfg.max_rounds`` rounds.

    ``depths`` are z-depth maps rendered from the current field. ``z_tol``
    falls back to ``cfg.z_tol``; one of them must be set. ``on_round`` sees
    the mask set after every completed round.
    """
    views = maskset.views
    missing = [v for v in views if v not in depths]
    if missing:
        raise MissingDepth(missing[0])
    z_tol = z_tol if z_tol is not None else cfg.z_tol
    if z_tol is None:
        raise ValueError("an occlusion tolerance is required")

    current = maskset.copy()
    objects = sorted({q for per in current.masks.values() for q in per})
    for round_index in range(1, cfg.max_rounds + 1):
        with tracer.start_as_current_span("segment.refine_round") as span:
            snapshot = current.copy()

            def gather(target: int) -> dict[int, list[PointPrompt]]:
                others = [v for v in views if v != target]
                if not others:
                    return {}
                rng = np.random.default_rng([cfg.seed, round_index, target])
                sources = [others[i] for i in rng.choice(len(others), size=min(cfg.views_per_target, len(others)), replace=False)]
                return {
                    q: _warp_into(target, sources, q, snapshot, depths, cameras, cfg, z_tol, round_index)
                    for q in objects
                }

            with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
                found = dict(zip(views, pool.map(gather, views)))

            added = 0
            changed = 0
            kept = 0
            for view in views:
                for q, new_prompts in found[view].items():
                    if not new_prompts:
                        continue
                    added += len(new_prompts)
                    current.prompts.setdefault(view, {}).setdefault(q, []).extend(new_prompts)
                    box = next((b for b in current.boxes.get(view, []) if b.object_index == q), None)
                    mask = segmenter.segment(view, q, current.prompts[view][q], box)
                    previous = current.masks[view][q]
                    # masks only grow: an answer dropping pixels keeps the previous mask
                    if np.any(previous & ~mask):
                        kept += 1
                        continue
                    if not np.array_equal(mask, previous):
                        changed += 1
                    current.masks[view][q] = mask

            current.iterations = round_index
            stats = RoundStats(round=round_index, prompts_added=added, mean_area=current.mean_area(), views_changed=changed)
            current.history.append(stats)
            REFINE_PROMPTS_ADDED_TOTAL.inc(added)
            REFINE_MEAN_MASK_AREA.set(stats.mean_area)
            if span.is_recording():
                span.set_attribute("refine.round", round_index)
                span.set_attribute("refine.prompts_added", added)
            logger.info(
                "refinement round {}: {} prompts added, {} masks changed, {} shrinking answers kept back, mean area {:.1f}",
                round_index, added, changed, kept, stats.mean_area,
            )
            if on_round is not None:
                on_round(round_index, current)
            if added == 0:
                break
    return current
