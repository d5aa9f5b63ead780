"""
Fixed multi-scale oriented-filter perceptual distance.

Each patch is smoothed into a Gaussian pyramid; every level is filtered with
six derivative-of-Gaussian orientations per colour channel and the
per-pixel feature vectors are softly unit-normalized. The whole filter chain
is linear, so for a given patch size it is precomputed once as a matrix per
level, which also gives the exact transpose for the gradient.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import ndimage

NUM_ORIENTATIONS = 6
PYRAMID_LEVELS = 3
FILTER_SIGMA = 1.0
NORM_EPS = 1e-4


@lru_cache(maxsize=16)
def feature_operators(size: int, levels: int = PYRAMID_LEVELS, sigma: float = FILTER_SIGMA) -> tuple[np.ndarray, ...]:
    """One (orientations, pixels_at_level, size*size) operator per pyramid level."""
    basis = np.eye(size * size).reshape(size * size, size, size)
    angles = np.arange(NUM_ORIENTATIONS) * np.pi / NUM_ORIENTATIONS
    operators = []
    level = basis
    for index in range(levels):
        if index > 0:
            level = ndimage.gaussian_filter(level, sigma=(0, sigma, sigma), mode="reflect")[:, ::2, ::2]
        if level.shape[1] < 1:
            break
        gx = ndimage.gaussian_filter(level, sigma=(0, sigma, sigma), order=(0, 0, 1), mode="reflect")
        gy = ndimage.gaussian_filter(level, sigma=(0, sigma, sigma), order=(0, 1, 0), mode="reflect")
        oriented = np.cos(angles)[:, None, None, None] * gx + np.sin(angles)[:, None, None, None] * gy
        op = oriented.reshape(NUM_ORIENTATIONS, size * size, -1).transpose(0, 2, 1)
        op.setflags(write=False)
        operators.append(op)
    return tuple(operators)


def _features(flat: np.ndarray, op: np.ndarray) -> np.ndarray:
    """``flat`` (N, size*size, C) to raw per-pixel features (N, pixels, orientations*C)."""
    f = np.einsum("kpq,nqc->npkc", op, flat)
    return f.reshape(f.shape[0], f.shape[1], -1)


def _normalize(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norm = np.sqrt(np.sum(f * f, axis=-1, keepdims=True) + NORM_EPS)
    return f / norm, norm


def _as_stack(patches: np.ndarray) -> tuple[np.ndarray, bool]:
    patches = np.asarray(patches, dtype=np.float64)
    single = patches.ndim == 3
    return (patches[None] if single else patches), single


def perceptual_distances(a: np.ndarray, b: np.ndarray, levels: int = PYRAMID_LEVELS) -> np.ndarray:
    """Distance per patch for stacks shaped (N, size, size, C)."""
    return perceptual_distances_and_grad(a, b, levels)[0]


def perceptual_distances_and_grad(a: np.ndarray, b: np.ndarray, levels: int = PYRAMID_LEVELS) -> tuple[np.ndarray, np.ndarray]:
    """Per-patch distances (N,) and the gradient of their sum with respect to ``a``."""
    a, _ = _as_stack(a)
    b, _ = _as_stack(b)
    if a.shape != b.shape:
        raise ValueError(f"patch shapes differ: {a.shape} vs {b.shape}")
    n, size, _, channels = a.shape
    flat_a = a.reshape(n, size * size, channels)
    flat_b = b.reshape(n, size * size, channels)
    operators = feature_operators(size, levels)
    dist = np.zeros(n)
    grad = np.zeros_like(flat_a)
    for op in operators:
        pixels = op.shape[1]
        fa_hat, norm_a = _normalize(_features(flat_a, op))
        fb_hat, _ = _normalize(_features(flat_b, op))
        diff = fa_hat - fb_hat
        dist += np.sum(diff * diff, axis=(1, 2)) / pixels
        g_hat = 2.0 * diff / pixels
        g_raw = (g_hat - fa_hat * np.sum(fa_hat * g_hat, axis=-1, keepdims=True)) / norm_a
        g_raw = g_raw.reshape(n, pixels, NUM_ORIENTATIONS, channels)
        grad += np.einsum("kpq,npkc->nqc", op, g_raw)
    count = len(operators)
    return dist / count, (grad / count).reshape(a.shape)


def perceptual_distance(patch_a: np.ndarray, patch_b: np.ndarray, levels: int = PYRAMID_LEVELS) -> float:
    """Distance between two (size, size, C) patches; 0 for identical patches, symmetric."""
    return float(perceptual_distances(patch_a, patch_b, levels)[0])
