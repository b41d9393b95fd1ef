"""Spatiotemporal features and the three-way texture routing rule.

Features are cheap, deterministic summaries of how a clip moves:
how much a single global translation explains (staticness), how well a
two-cluster split explains the block-motion field (discrete parts vs
continuum), plus overall motion magnitude and spatial detail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ClipTooShort
from .interp import InterpParams, PairMotionContext
from .media import Clip
from .taxonomy import TextureClass

#: Most frame pairs a feature pass will look at.
MAX_FEATURE_PAIRS = 16

_KMEANS_ITERS = 10


@dataclass(frozen=True)
class TextureFeatures:
    gmc_residual: float       # mean |luma residual| after best global translation
    flow_incoherence: float   # within/total variance ratio of a 2-way vector split
    mean_motion: float        # mean block vector magnitude, pixels/frame
    spatial_detail: float     # mean luma gradient magnitude, gray levels/pixel


@dataclass(frozen=True)
class ClassifierThresholds:
    static_residual_max: float = 2.0
    incoherence_split: float = 0.5

    def __post_init__(self):
        if self.static_residual_max <= 0 or self.incoherence_split <= 0:
            raise ValueError("thresholds must be positive")


DEFAULT_THRESHOLDS = ClassifierThresholds()


def _pair_indices(n_frames: int) -> list[int]:
    n_pairs = n_frames - 1
    step = max(1, math.ceil(n_pairs / MAX_FEATURE_PAIRS))
    return list(range(0, n_pairs, step))


def extract_features(clip: Clip, params: InterpParams) -> TextureFeatures:
    """Average features over a deterministic subsample of consecutive frame pairs."""
    if len(clip) < 3:
        raise ClipTooShort(f"need >= 3 frames for features, got {len(clip)}")
    dxs, dys, _ = _kernels.candidate_shifts(params.search_range)
    gmc_vals = []
    incoh_vals = []
    motion_vals = []
    detail_vals = []
    for t in _pair_indices(len(clip)):
        a = clip.frames[t].luma
        b = clip.frames[t + 1].luma
        sums, counts = _kernels.global_sad(a, b, dxs, dys)
        valid = counts > 0
        gmc_vals.append(float(np.min(sums[valid] / counts[valid])))

        vec, _ = PairMotionContext(a, b).vectors(params)
        vectors = _interior_vectors(vec, params, a.shape)
        motion_vals.append(float(np.mean(np.hypot(vectors[:, 0], vectors[:, 1]))))
        incoh_vals.append(_two_cluster_ratio(vectors))

        gy, gx = np.gradient(a.astype(np.float64))
        detail_vals.append(float(np.mean(np.hypot(gx, gy))))
    return TextureFeatures(
        gmc_residual=float(np.mean(gmc_vals)),
        flow_incoherence=float(np.mean(incoh_vals)),
        mean_motion=float(np.mean(motion_vals)),
        spatial_detail=float(np.mean(detail_vals)),
    )


def _interior_vectors(vec: np.ndarray, params: InterpParams,
                      shape: tuple[int, int]) -> np.ndarray:
    """Vectors of blocks whose full search window fits inside the frame.

    Border blocks have clipped candidate sets and produce arbitrary vectors
    that would pollute the motion statistics; they are excluded whenever any
    interior block exists.
    """
    h, w = shape
    bs = params.block_size
    r = params.search_range
    gh, gw = vec.shape[:2]
    keep_y = [by for by in range(gh)
              if by * bs >= r and min((by + 1) * bs, h) + r <= h]
    keep_x = [bx for bx in range(gw)
              if bx * bs >= r and min((bx + 1) * bs, w) + r <= w]
    if keep_y and keep_x:
        vec = vec[np.ix_(keep_y, keep_x)]
    return vec.reshape(-1, 2).astype(np.float64)


def _two_cluster_ratio(vectors: np.ndarray) -> float:
    """Within-cluster to total variance ratio of a 2-means split, in [0, 1].

    Fixed 10-iteration Lloyd refinement seeded with the lexicographic extremes
    of the vector set, so the result is a pure function of the input.
    """
    grand = vectors.mean(axis=0)
    total = float(np.mean(np.sum((vectors - grand) ** 2, axis=1)))
    if total < 1e-12:
        return 0.0
    order = np.lexsort((vectors[:, 1], vectors[:, 0]))
    c0 = vectors[order[0]].copy()
    c1 = vectors[order[-1]].copy()
    assign = None
    for _ in range(_KMEANS_ITERS):
        d0 = np.sum((vectors - c0) ** 2, axis=1)
        d1 = np.sum((vectors - c1) ** 2, axis=1)
        assign = d1 < d0
        if np.any(~assign):
            c0 = vectors[~assign].mean(axis=0)
        if np.any(assign):
            c1 = vectors[assign].mean(axis=0)
    within = np.where(assign,
                      np.sum((vectors - c1) ** 2, axis=1),
                      np.sum((vectors - c0) ** 2, axis=1))
    ratio = float(np.mean(within)) / total
    return min(max(ratio, 0.0), 1.0)


def classify(features: TextureFeatures,
             thresholds: ClassifierThresholds = DEFAULT_THRESHOLDS) -> TextureClass:
    """Route features to a class; boundary values take the earlier branch."""
    if features.gmc_residual <= thresholds.static_residual_max:
        return TextureClass.STATIC
    if features.flow_incoherence <= thresholds.incoherence_split:
        return TextureClass.DYNDIS
    return TextureClass.DYNCON


def classify_clip(clip: Clip, params: InterpParams,
                  thresholds: ClassifierThresholds = DEFAULT_THRESHOLDS) -> TextureClass:
    return classify(extract_features(clip, params), thresholds)
