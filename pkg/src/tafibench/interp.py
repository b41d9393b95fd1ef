"""Parameterized block-motion frame interpolator.

The interpolator is the tunable "model": integer-pel exhaustive block
matching with a causal median smoothness prior, midpoint motion
compensation from both anchor frames, optional overlapped-block windowing
and SAD-weighted blending, with a plain frame-average mode as the trivial
configuration.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import GeometryMismatch, InvalidSpec
from .media import Frame

ALLOWED_BLOCK_SIZES = (8, 16, 32)
MAX_SEARCH_RANGE = 32


class InterpMode(enum.Enum):
    MCI = "mci"
    FRAME_AVERAGE = "frame_average"


class BlendMode(enum.Enum):
    AVERAGE = "average"
    SAD_WEIGHTED = "sad_weighted"


class ObmcMode(enum.Enum):
    OFF = "off"
    RAISED_COSINE = "raised_cosine"


@dataclass(frozen=True)
class InterpParams:
    """Interpolator configuration; the unit being specialized per texture class."""

    block_size: int = 16
    search_range: int = 8
    smoothness_lambda: float = 16.0
    obmc: ObmcMode = ObmcMode.OFF
    blend: BlendMode = BlendMode.AVERAGE
    mode: InterpMode = InterpMode.MCI

    def __post_init__(self):
        if self.block_size not in ALLOWED_BLOCK_SIZES:
            raise InvalidSpec(f"block_size must be one of {ALLOWED_BLOCK_SIZES}, "
                              f"got {self.block_size}")
        if not 0 <= self.search_range <= MAX_SEARCH_RANGE:
            raise InvalidSpec(f"search_range must be in [0, {MAX_SEARCH_RANGE}], "
                              f"got {self.search_range}")
        if self.smoothness_lambda < 0:
            raise InvalidSpec(f"smoothness_lambda must be >= 0, "
                              f"got {self.smoothness_lambda}")


#: The untuned configuration every comparison is anchored to.
DEFAULT_PARAMS = InterpParams()

_PARAM_FIELDS = ("block_size", "search_range", "smoothness_lambda",
                 "obmc", "blend", "mode")


def params_to_dict(params: InterpParams) -> dict[str, str]:
    return {
        "block_size": str(params.block_size),
        "search_range": str(params.search_range),
        "smoothness_lambda": repr(float(params.smoothness_lambda)),
        "obmc": params.obmc.value,
        "blend": params.blend.value,
        "mode": params.mode.value,
    }


def params_from_dict(d: dict[str, str]) -> InterpParams:
    try:
        return InterpParams(
            block_size=int(d["block_size"]),
            search_range=int(d["search_range"]),
            smoothness_lambda=float(d["smoothness_lambda"]),
            obmc=ObmcMode(d["obmc"]),
            blend=BlendMode(d["blend"]),
            mode=InterpMode(d["mode"]),
        )
    except (KeyError, ValueError) as exc:
        raise InvalidSpec(f"bad interpolator parameters: {exc}") from exc


@dataclass(frozen=True, eq=False)
class MotionField:
    """Per-block integer motion vectors (dx, dy) on a block_size grid."""

    vectors: np.ndarray          # int32 (grid_h, grid_w, 2), last axis (dx, dy)
    matched_sad: np.ndarray      # int32 (grid_h, grid_w), SAD of the chosen shift
    block_size: int
    frame_width: int
    frame_height: int

    @property
    def grid_w(self) -> int:
        return self.vectors.shape[1]

    @property
    def grid_h(self) -> int:
        return self.vectors.shape[0]


class PairMotionContext:
    """SAD-table cache for one (prev, next) luma pair.

    Tables depend only on (block_size, search_range); selections for different
    smoothness weights reuse them, and a table built at radius r serves any
    radius <= r via canonical-order subsetting. Evaluating several profiles on
    the same frame pair through one context skips redundant matching work.
    """

    def __init__(self, prev_luma: np.ndarray, next_luma: np.ndarray):
        self.prev = np.ascontiguousarray(prev_luma)
        self.next = np.ascontiguousarray(next_luma)
        self._tables: dict[int, tuple[int, np.ndarray]] = {}  # bs -> (radius, table)

    def _table(self, bs: int, radius: int) -> tuple[np.ndarray, ...]:
        dxs, dys, l1 = _kernels.candidate_shifts(radius)
        cached = self._tables.get(bs)
        if cached is None or cached[0] < radius:
            table = _kernels.sad_table(self.prev, self.next, bs, dxs, dys)
            self._tables[bs] = (radius, table)
            return table, dxs, dys, l1
        built_radius, table = cached
        if built_radius == radius:
            return table, dxs, dys, l1
        bdxs, bdys, _ = _kernels.candidate_shifts(built_radius)
        keep = (np.abs(bdxs) <= radius) & (np.abs(bdys) <= radius)
        return np.ascontiguousarray(table[:, :, keep]), dxs, dys, l1

    def vectors(self, params: InterpParams) -> tuple[np.ndarray, np.ndarray]:
        table, dxs, dys, l1 = self._table(params.block_size, params.search_range)
        return _kernels.select_vectors(table, dxs, dys, l1,
                                       float(params.smoothness_lambda))

    def prewarm(self, params_list) -> None:
        """Build each block size's table at the largest radius it will need."""
        per_bs: dict[int, int] = {}
        for p in params_list:
            if p.mode is InterpMode.MCI:
                per_bs[p.block_size] = max(per_bs.get(p.block_size, 0),
                                           p.search_range)
        for bs, radius in sorted(per_bs.items()):
            self._table(bs, radius)


def estimate_motion(prev: Frame, next: Frame, params: InterpParams) -> MotionField:
    """Exhaustive block matching from prev toward next.

    Cost per candidate shift v is SAD(block, shifted block) plus
    smoothness_lambda * |v - median(decided neighbors)|1; ties resolve to the
    smallest |v|1, then smallest dy, then smallest dx.
    """
    _check_geometry(prev, next)
    vec, sad = PairMotionContext(prev.luma, next.luma).vectors(params)
    return MotionField(vectors=vec, matched_sad=sad, block_size=params.block_size,
                       frame_width=prev.width, frame_height=prev.height)


def interpolate(prev: Frame, next: Frame, params: InterpParams) -> Frame:
    """Synthesize the temporal midpoint frame between prev and next."""
    _check_geometry(prev, next)
    planes = _interpolate_planes(prev, next, params, luma_only=False)
    return Frame(*planes)


def interpolate_luma(prev: Frame, next: Frame, params: InterpParams,
                     ctx_fwd: PairMotionContext | None = None,
                     ctx_bwd: PairMotionContext | None = None) -> np.ndarray:
    """Luma plane of interpolate(); identical samples, skips chroma work.

    Callers evaluating many configurations on one frame pair can pass cached
    motion contexts to share SAD tables across calls.
    """
    _check_geometry(prev, next)
    return _interpolate_planes(prev, next, params, luma_only=True,
                               ctx_fwd=ctx_fwd, ctx_bwd=ctx_bwd)[0]


def _check_geometry(prev: Frame, next: Frame) -> None:
    if prev.luma.shape != next.luma.shape:
        raise GeometryMismatch(f"frame geometries differ: "
                               f"{prev.width}x{prev.height} vs {next.width}x{next.height}")


def _interpolate_planes(prev: Frame, next: Frame, params: InterpParams,
                        luma_only: bool, ctx_fwd: PairMotionContext | None = None,
                        ctx_bwd: PairMotionContext | None = None):
    if params.mode is InterpMode.FRAME_AVERAGE:
        out = [_rounded_mean(prev.luma, next.luma)]
        if not luma_only:
            out.append(_rounded_mean(prev.chroma_u, next.chroma_u))
            out.append(_rounded_mean(prev.chroma_v, next.chroma_v))
        return out

    fwd = ctx_fwd if ctx_fwd is not None else PairMotionContext(prev.luma, next.luma)
    bwd = ctx_bwd if ctx_bwd is not None else PairMotionContext(next.luma, prev.luma)
    vec_f, sad_f = fwd.vectors(params)
    vec_b, sad_b = bwd.vectors(params)

    # halve toward the temporal midpoint; integer-pel only, truncate toward 0
    half_f = np.fix(vec_f / 2.0).astype(np.int32)
    half_b = np.fix(vec_b / 2.0).astype(np.int32)

    w_f, w_b = _blend_weights(params, sad_f, sad_b)
    out = [_compose_plane(prev.luma, next.luma, half_f, half_b, w_f, w_b,
                          params.block_size, params.obmc)]
    if not luma_only:
        quart_f = np.fix(half_f / 2.0).astype(np.int32)
        quart_b = np.fix(half_b / 2.0).astype(np.int32)
        cbs = params.block_size // 2
        for plane in ("chroma_u", "chroma_v"):
            out.append(_compose_plane(getattr(prev, plane), getattr(next, plane),
                                      quart_f, quart_b, w_f, w_b, cbs, params.obmc))
    return out


def _rounded_mean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return ((a.astype(np.uint16) + b.astype(np.uint16) + 1) >> 1).astype(np.uint8)


def _blend_weights(params, sad_f, sad_b):
    if params.blend is BlendMode.SAD_WEIGHTED:
        return (1.0 / (1.0 + sad_f.astype(np.float64)),
                1.0 / (1.0 + sad_b.astype(np.float64)))
    ones = np.ones(sad_f.shape, dtype=np.float64)
    return ones, ones


def _compose_plane(prev_plane, next_plane, half_f, half_b, w_f, w_b, bs, obmc):
    pred_f, cov_f = _compensate(prev_plane, half_f, bs, obmc)
    pred_b, cov_b = _compensate(next_plane, half_b, bs, obmc)
    h, w = prev_plane.shape
    wf = _expand_grid(w_f, bs, h, w) * cov_f
    wb = _expand_grid(w_b, bs, h, w) * cov_b
    wsum = wf + wb
    fallback = _rounded_mean(prev_plane, next_plane).astype(np.float64)
    num = wf * pred_f + wb * pred_b
    covered = wsum > 0
    blended = np.where(covered, num / np.where(covered, wsum, 1.0), fallback)
    return np.clip(np.rint(blended), 0, 255).astype(np.uint8)


def _block_edges(n: int, bs: int) -> np.ndarray:
    return np.arange(0, n + bs, bs).clip(max=n)


def _expand_grid(grid: np.ndarray, bs: int, h: int, w: int) -> np.ndarray:
    ye = _block_edges(h, bs)
    xe = _block_edges(w, bs)
    rows = np.repeat(grid, np.diff(ye), axis=0)
    return np.repeat(rows, np.diff(xe), axis=1)


def _compensate(plane, half_vec, bs, obmc):
    """Pull-warp ``plane`` by per-block midpoint vectors.

    Returns (prediction float64, coverage float64) where coverage is 0 at
    samples whose source coordinate falls outside the plane (and, with OBMC,
    carries the accumulated window mass of the valid contributions).
    """
    h, w = plane.shape
    if obmc is ObmcMode.RAISED_COSINE:
        return _compensate_obmc(plane, half_vec, bs)
    vx = _expand_grid(half_vec[:, :, 0], bs, h, w)
    vy = _expand_grid(half_vec[:, :, 1], bs, h, w)
    yy, xx = np.indices((h, w))
    sy = yy - vy
    sx = xx - vx
    valid = (sy >= 0) & (sy < h) & (sx >= 0) & (sx < w)
    pred = plane[sy.clip(0, h - 1), sx.clip(0, w - 1)].astype(np.float64)
    return pred * valid, valid.astype(np.float64)


def _obmc_window(bs: int) -> np.ndarray:
    # separable raised cosine of span 2*bs; copies at block stride sum to 1
    i = np.arange(2 * bs)
    w1 = np.sin(np.pi * (i + 0.5) / (2 * bs)) ** 2
    return np.outer(w1, w1)


def _compensate_obmc(plane, half_vec, bs):
    win = _obmc_window(bs)
    acc, wacc = _kernels.obmc_accumulate(plane, half_vec, bs, win)
    covered = wacc > 0
    pred = np.where(covered, acc / np.where(covered, wacc, 1.0), 0.0)
    return pred, covered.astype(np.float64)


# ---------------------------------------------------------------------------
# debug sidecar
# ---------------------------------------------------------------------------

def dump_motion_field(field: MotionField) -> str:
    """One-line header (frame geometry, block size, grid), then 'dx dy' per block."""
    lines = [f"{field.frame_width} {field.frame_height} {field.block_size} "
             f"{field.grid_w} {field.grid_h}"]
    for by in range(field.grid_h):
        for bx in range(field.grid_w):
            lines.append(f"{field.vectors[by, bx, 0]} {field.vectors[by, bx, 1]}")
    return "\n".join(lines) + "\n"


def parse_motion_field(text: str) -> MotionField:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    fw, fh, bs, gw, gh = (int(v) for v in lines[0].split())
    vec = np.zeros((gh, gw, 2), dtype=np.int32)
    for i, ln in enumerate(lines[1:gh * gw + 1]):
        dx, dy = (int(v) for v in ln.split())
        vec[i // gw, i % gw] = (dx, dy)
    return MotionField(vectors=vec, matched_sad=np.zeros((gh, gw), np.int32),
                       block_size=bs, frame_width=fw, frame_height=fh)
