"""
Evaluation against the paired empty-scene ground truth.

Only the empty-scene renders and depths are read, never the appearance of the
removed objects. There is no FID: it needs a pretrained embedding network, so
the report carries the perceptual-proxy distance and a cross-view
inconsistency score instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Mapping, Optional

import numpy as np

from inpaint360.errors import NumericalFailure
from inpaint360.field.grid import RadianceField
from inpaint360.geometry.camera import Camera, in_bounds, pixel_index, project_points
from inpaint360.perceptual.distance import perceptual_distances
from inpaint360.perceptual.patches import extract_patches, partition_patches
from inpaint360.segment.refine import backproject_pixels

PSNR_CAP = 99.0
REPORT_NOTE = (
    "FID is not reported: it requires a pretrained embedding network. "
    "lpips_proxy is a fixed multi-scale oriented-filter distance standing in for LPIPS."
)
ROW_METRICS = ("psnr", "in_mask_l1", "lpips_proxy", "inconsistency")


def psnr(rendered: np.ndarray, target: np.ndarray) -> float:
    """PSNR for images in [0, 1], capped at 99 dB (identical images hit the cap)."""
    mse = float(np.mean((np.asarray(rendered, dtype=np.float64) - target) ** 2))
    if mse <= 0.0:
        return PSNR_CAP
    return float(min(PSNR_CAP, 10.0 * np.log10(1.0 / mse)))


def in_mask_l1(rendered: np.ndarray, target: np.ndarray, mask: np.ndarray) -> float:
    if not mask.any():
        return 0.0
    return float(np.mean(np.abs(rendered[mask] - target[mask])))


def lpips_proxy(rendered: np.ndarray, target: np.ndarray, mask: np.ndarray, patch_size: int) -> float:
    """Mean perceptual distance over the patches that touch the mask."""
    patches = partition_patches(mask, patch_size)
    anchors = patches.with_inpainted
    if len(anchors) == 0:
        return 0.0
    a = extract_patches(rendered, patches, anchors)
    b = extract_patches(target, patches, anchors)
    return float(np.mean(perceptual_distances(a, b)))


def inconsistency_scores(
    images: Mapping[int, np.ndarray],
    masks: Mapping[int, np.ndarray],
    cameras: Mapping[int, Camera],
    depths: Mapping[int, np.ndarray],
    tolerance: float,
) -> dict[int, float]:
    """
    Per view: mean colour variance of its in-mask surface points across every
    view that sees them (z-test against ``depths`` within ``tolerance``).
    """
    views = sorted(images)
    scores = {}
    for i in views:
        rows, cols = np.nonzero(masks[i])
        z = depths[i][rows, cols]
        ok = np.isfinite(z) & (z > 0)
        if not ok.any():
            scores[i] = 0.0
            continue
        points = backproject_pixels(cameras[i], rows[ok], cols[ok], z[ok])
        total = np.zeros((points.shape[0], 3))
        total_sq = np.zeros((points.shape[0], 3))
        count = np.zeros(points.shape[0])
        for j in views:
            u, v, zj = project_points(cameras[j], points)
            seen = in_bounds(cameras[j], u, v)
            r, c = pixel_index(np.where(seen, u, 0.0), np.where(seen, v, 0.0))
            seen &= np.abs(zj - depths[j][r, c]) <= tolerance
            colors = images[j][r, c]
            total[seen] += colors[seen]
            total_sq[seen] += colors[seen] ** 2
            count += seen
        multi = count >= 2
        if not multi.any():
            scores[i] = 0.0
            continue
        mean = total[multi] / count[multi, None]
        variance = np.maximum(total_sq[multi] / count[multi, None] - mean ** 2, 0.0)
        scores[i] = float(np.mean(variance))
    return scores


def floater_mass(
    field: RadianceField,
    masks: Mapping[int, np.ndarray],
    cameras: Mapping[int, Camera],
    empty_depths: Mapping[int, np.ndarray],
    margin: float,
    density_floor: float = 0.0,
) -> tuple[float, float]:
    """
    Density mass (sum of sigma times voxel volume) in the removal region and
    outside it.

    A grid node belongs to the removal region when it projects into some
    view's mask and lies at least ``margin`` in front of the empty-scene
    surface in every view that sees it, i.e. in space the empty scene
    leaves free.
    """
    nodes = field.node_positions().reshape(-1, 3)
    sigma = field.node_density().reshape(-1)
    sigma = np.where(sigma > density_floor, sigma, 0.0)
    in_frustum = np.zeros(nodes.shape[0], dtype=bool)
    free = np.ones(nodes.shape[0], dtype=bool)
    for view in sorted(cameras):
        cam = cameras[view]
        u, v, z = project_points(cam, nodes)
        seen = in_bounds(cam, u, v)
        r, c = pixel_index(np.where(seen, u, 0.0), np.where(seen, v, 0.0))
        in_frustum |= seen & masks[view][r, c]
        surface = empty_depths[view][r, c]
        free &= ~seen | (z < surface - margin)
    region = in_frustum & free
    volume = field.voxel_volume
    return float(np.sum(sigma[region]) * volume), float(np.sum(sigma[~region]) * volume)


@dataclass
class ViewRow:
    view: int
    psnr: float
    in_mask_l1: float
    lpips_proxy: float
    inconsistency: float

    def as_dict(self) -> dict:
        return {
            "view": self.view, "psnr": self.psnr, "in_mask_l1": self.in_mask_l1,
            "lpips_proxy": self.lpips_proxy, "inconsistency": self.inconsistency,
        }


@dataclass
class EvalReport:
    variant: str
    rows: list[ViewRow]
    floater_mass: Optional[float] = None
    out_of_region_mass: Optional[float] = None
    note: str = REPORT_NOTE
    extra: dict = dc_field(default_factory=dict)

    @property
    def aggregate(self) -> dict[str, float]:
        agg = {name: float(np.mean([getattr(r, name) for r in self.rows])) for name in ROW_METRICS}
        if self.floater_mass is not None:
            agg["floater_mass"] = self.floater_mass
            agg["out_of_region_mass"] = self.out_of_region_mass
        return agg

    def check_finite(self, stage: str = "eval") -> None:
        values = [v for r in self.rows for v in r.as_dict().values()] + list(self.aggregate.values())
        if not np.all(np.isfinite(values)):
            raise NumericalFailure(stage, None, f"metric in report '{self.variant}'")

    def to_document(self) -> dict:
        return {
            "variant": self.variant,
            "note": self.note,
            "aggregate": self.aggregate,
            "views": [r.as_dict() for r in self.rows],
            **self.extra,
        }


def evaluate_images(
    variant: str,
    images: Mapping[int, np.ndarray],
    empty_images: Mapping[int, np.ndarray],
    masks: Mapping[int, np.ndarray],
    cameras: Mapping[int, Camera],
    empty_depths: Mapping[int, np.ndarray],
    patch_size: int,
    tolerance: float,
) -> EvalReport:
    """Per-view image metrics of ``images`` against the empty-scene ground truth."""
    inconsistency = inconsistency_scores(images, masks, cameras, empty_depths, tolerance)
    rows = []
    for view in sorted(images):
        rendered, target, mask = images[view], empty_images[view], masks[view]
        rows.append(
            ViewRow(
                view=view,
                psnr=psnr(rendered, target),
                in_mask_l1=in_mask_l1(rendered, target, mask),
                lpips_proxy=lpips_proxy(rendered, target, mask, patch_size),
                inconsistency=inconsistency[view],
            )
        )
    return EvalReport(variant=variant, rows=rows)


def ablation_summary(reports: Mapping[str, EvalReport], reference_mass: Optional[float] = None) -> dict:
    """Aggregates side by side plus whether the expected ablation ordering holds."""
    aggregates = {name: report.aggregate for name, report in sorted(reports.items())}
    checks = {}
    variants = set(aggregates)
    for metric in ("lpips_proxy", "in_mask_l1"):
        if {"base", "in", "geom", "full"} <= variants:
            a = {v: aggregates[v][metric] for v in ("base", "in", "geom", "full")}
            checks[f"{metric}_full_best"] = bool(a["full"] <= a["in"] and a["full"] <= a["geom"])
            checks[f"{metric}_singles_beat_base"] = bool(a["in"] <= a["base"] and a["geom"] <= a["base"])
    if {"base", "geom"} <= variants and "floater_mass" in aggregates["base"]:
        checks["geom_reduces_floaters"] = bool(aggregates["geom"]["floater_mass"] < aggregates["base"]["floater_mass"])
    summary = {"note": REPORT_NOTE, "variants": aggregates, "ordering": checks}
    if reference_mass is not None:
        summary["reference_floater_mass"] = reference_mass
    return summary
