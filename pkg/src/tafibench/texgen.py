"""Deterministic synthetic texture clips for the three texture classes.

Everything is derived from seeded integer lattice noise, so a spec (including
its seed) maps to one bit-exact clip on any platform. The three generators
realize the defining motion model of each class:

* static  -- one procedural texture plane under a smoothly varying global
  similarity warp (integer translation plus a sub-pixel-bounded rotation/zoom,
  so global compensation can nearly cancel it);
* dyndis  -- rigid textured sprites oscillating independently along a shared
  axis over a static textured background, with mutual occlusion;
* dyncon  -- multi-octave noise advected by an incoherent time-varying
  displacement field, with slow appearance evolution (water/smoke-like).

Difficulty under motion-compensated interpolation is static < dyndis < dyncon
by construction.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import InvalidSpec
from .media import Clip, Frame
from .taxonomy import ALL_CLASSES, TextureClass


def mix64(*values: int) -> int:
    """Stateless 64-bit mixer for deriving independent sub-seeds."""
    h = 0x9E3779B97F4A7C15
    for v in values:
        h = (h ^ (v & 0xFFFFFFFFFFFFFFFF)) * 0xBF58476D1CE4E5B9 % (1 << 64)
        h ^= h >> 29
    h = (h * 0x94D049BB133111EB) % (1 << 64)
    h ^= h >> 32
    return h


def _octave_seeds(seed: int, octaves: int) -> np.ndarray:
    return np.array([mix64(seed, o) for o in range(octaves)], dtype=np.uint64)


def fbm_2d(x, y, seed: int, octaves: int = 4, gain: float = 0.55) -> np.ndarray:
    """Multi-octave value noise in roughly [-1, 1] at float coords (pitch 1)."""
    x = np.ascontiguousarray(np.broadcast_arrays(x, y)[0], dtype=np.float64)
    y = np.ascontiguousarray(np.broadcast_arrays(x, y)[1], dtype=np.float64)
    return _kernels.fbm2_grid(x, y, _octave_seeds(seed, octaves), gain)


def fbm_3d(x, y, z: float, seed: int, octaves: int = 4,
           gain: float = 0.55) -> np.ndarray:
    x = np.ascontiguousarray(np.broadcast_arrays(x, y)[0], dtype=np.float64)
    y = np.ascontiguousarray(np.broadcast_arrays(x, y)[1], dtype=np.float64)
    return _kernels.fbm3_grid(x, y, float(z), _octave_seeds(seed, octaves), gain)


def _quantize_luma(v: np.ndarray, contrast: float = 110.0) -> np.ndarray:
    return np.clip(np.rint(128.0 + contrast * v), 0, 255).astype(np.uint8)


def _quantize_chroma(v: np.ndarray, spread: float = 40.0) -> np.ndarray:
    return np.clip(np.rint(128.0 + spread * v), 0, 255).astype(np.uint8)


def _upsample_bilinear(coarse: np.ndarray, k: int, h: int, w: int) -> np.ndarray:
    """Bilinear upsample of a stride-k sample grid back to (h, w)."""
    yy, xx = np.indices((h, w), dtype=np.float64)
    fy = yy / k
    fx = xx / k
    y0 = np.minimum(fy.astype(np.int64), coarse.shape[0] - 2)
    x0 = np.minimum(fx.astype(np.int64), coarse.shape[1] - 2)
    ty = fy - y0
    tx = fx - x0
    c00 = coarse[y0, x0]
    c10 = coarse[y0, x0 + 1]
    c01 = coarse[y0 + 1, x0]
    c11 = coarse[y0 + 1, x0 + 1]
    top = c00 + (c10 - c00) * tx
    bot = c01 + (c11 - c01) * tx
    return top + (bot - top) * ty


# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------

#: Desk-scale default geometry: full corpus runs in minutes.
DEFAULT_WIDTH = 192
DEFAULT_HEIGHT = 192
DEFAULT_FRAMES = 96

#: Per-class default peak apparent motion (pixels/frame). Evaluation pairs
#: span two frame intervals, so apparent pair displacement is about twice this.
CLASS_AMPLITUDE = {
    TextureClass.STATIC: 3.0,
    TextureClass.DYNDIS: 3.0,
    TextureClass.DYNCON: 2.5,
}

# displacement-noise gain so dyncon apparent motion matches motion_amplitude
_DYNCON_DISP_SCALE = 2.5


@dataclass(frozen=True)
class SynthSpec:
    texture_class: TextureClass
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    n_frames: int = DEFAULT_FRAMES
    fps_num: int = 25
    fps_den: int = 1
    motion_amplitude: float = 3.0     # peak pixels/frame
    detail_scale: float = 1.0         # spatial frequency multiplier
    n_sprites: int = 7                # dyndis only
    advect_turbulence: float = 1.0    # dyncon only
    seed: int = 0

    def __post_init__(self):
        if self.n_frames < 3:
            raise InvalidSpec(f"n_frames must be >= 3, got {self.n_frames}")
        if self.width < 16 or self.height < 16 or self.width % 2 or self.height % 2:
            raise InvalidSpec(f"geometry must be even and >= 16x16, got "
                              f"{self.width}x{self.height}")
        if self.motion_amplitude < 0:
            raise InvalidSpec("motion_amplitude must be >= 0")
        if self.detail_scale <= 0:
            raise InvalidSpec("detail_scale must be positive")
        if self.fps_num <= 0 or self.fps_den <= 0:
            raise InvalidSpec("frame rate must be positive")
        if self.texture_class is TextureClass.DYNDIS and self.n_sprites < 2:
            raise InvalidSpec(f"dyndis needs >= 2 sprites, got {self.n_sprites}")


def make_default_spec(texture_class: TextureClass, seed: int = 0,
                      **overrides) -> SynthSpec:
    base = SynthSpec(texture_class=texture_class, seed=seed,
                     motion_amplitude=CLASS_AMPLITUDE[texture_class])
    return replace(base, **overrides) if overrides else base


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def synth_clip(spec: SynthSpec, name: str | None = None) -> Clip:
    """Generate one labelled clip; a pure function of the spec."""
    if name is None:
        name = f"{spec.texture_class.value}-{spec.seed & 0xFFFFFFFF:08x}"
    if spec.texture_class is TextureClass.STATIC:
        frames = _gen_static(spec)
    elif spec.texture_class is TextureClass.DYNDIS:
        frames = _gen_dyndis(spec)
    else:
        frames = _gen_dyncon(spec)
    return Clip(name=name, frames=tuple(frames), fps_num=spec.fps_num,
                fps_den=spec.fps_den, label=spec.texture_class)


def _base_freq(spec: SynthSpec) -> float:
    # fundamental texture wavelength ~24 px at detail_scale 1
    return spec.detail_scale / 24.0


def _pixel_grids(spec: SynthSpec):
    yy, xx = np.indices((spec.height, spec.width), dtype=np.float64)
    cyy, cxx = np.indices((spec.height // 2, spec.width // 2), dtype=np.float64)
    return xx, yy, cxx * 2.0 + 0.5, cyy * 2.0 + 0.5


def static_warp_path(spec: SynthSpec):
    """Per-frame global warp (scale, angle_rad, tx, ty); identity at frame 0.

    The warp is a rigid pan: two superposed sinusoidal translation components
    rounded to whole pixels per frame, so a single integer global translation
    compensates each frame exactly. Peak speed equals motion_amplitude.
    """
    rng = np.random.default_rng(mix64(spec.seed, 0x5741))
    t = np.arange(spec.n_frames, dtype=np.float64)
    amp = spec.motion_amplitude

    pos = np.zeros((spec.n_frames, 2))
    for share, period_rng in ((0.7, (40.0, 70.0)), (0.3, (15.0, 30.0))):
        period = rng.uniform(*period_rng)
        phase = rng.uniform(0, 2 * np.pi)
        theta = rng.uniform(0, 2 * np.pi)
        radius = share * amp * period / (2 * np.pi)
        wave = radius * np.sin(2 * np.pi * t / period + phase)
        pos += wave[:, None] * np.array([np.cos(theta), np.sin(theta)])
    trans = np.rint(pos - pos[0]).astype(np.int64)
    return [(1.0, 0.0, int(trans[i, 0]), int(trans[i, 1]))
            for i in range(spec.n_frames)]


def warp_coords(xx, yy, scale, angle, tx, ty, cx, cy):
    """Apply the similarity (scale, rotation about (cx, cy), translation)."""
    dx = xx - cx
    dy = yy - cy
    cos_a = np.cos(angle) * scale
    sin_a = np.sin(angle) * scale
    qx = cx + cos_a * dx - sin_a * dy + tx
    qy = cy + sin_a * dx + cos_a * dy + ty
    return qx, qy


def _gen_static(spec: SynthSpec):
    f0 = _base_freq(spec)
    tex_seed = mix64(spec.seed, 1)
    u_seed = mix64(spec.seed, 2)
    v_seed = mix64(spec.seed, 3)
    xx, yy, cxx, cyy = _pixel_grids(spec)
    cx, cy = (spec.width - 1) / 2.0, (spec.height - 1) / 2.0

    frames = []
    for scale, angle, tx, ty in static_warp_path(spec):
        qx, qy = warp_coords(xx, yy, scale, angle, tx, ty, cx, cy)
        luma = _quantize_luma(fbm_2d(qx * f0, qy * f0, tex_seed))
        qcx, qcy = warp_coords(cxx, cyy, scale, angle, tx, ty, cx, cy)
        cu = _quantize_chroma(fbm_2d(qcx * f0 * 0.5, qcy * f0 * 0.5, u_seed, octaves=2))
        cv = _quantize_chroma(fbm_2d(qcx * f0 * 0.5, qcy * f0 * 0.5, v_seed, octaves=2))
        frames.append(Frame(luma, cu, cv))
    return frames


def sprite_tracks(spec: SynthSpec):
    """Per-sprite (radius, center, axis angle, period, phase, peak speed).

    Sprites oscillate along a shared wind-like axis (per-sprite jitter of
    +/- 15 degrees) with independent phases and speeds.
    """
    rng = np.random.default_rng(mix64(spec.seed, 0xD15C))
    axis = rng.uniform(0, np.pi)
    tracks = []
    for _ in range(spec.n_sprites):
        radius = rng.uniform(24.0, 40.0)
        margin = min(radius + 2.0, spec.width / 2 - 1, spec.height / 2 - 1)
        cx = rng.uniform(margin, spec.width - margin)
        cy = rng.uniform(margin, spec.height - margin)
        angle = axis + rng.uniform(-np.pi / 22, np.pi / 22)
        period = rng.uniform(24.0, 56.0)
        phase = rng.uniform(0, 2 * np.pi)
        speed = rng.uniform(0.7, 1.0) * spec.motion_amplitude
        tracks.append((radius, cx, cy, angle, period, phase, speed))
    return tracks


def _sprite_offset(track, t: int) -> tuple[float, float]:
    radius, cx, cy, angle, period, phase, speed = track
    swing = speed * period / (2 * np.pi)
    w = swing * np.sin(2 * np.pi * t / period + phase)
    return float(w * np.cos(angle)), float(w * np.sin(angle))


def _paint_sprite(canvas, px, py, radius, freq, seed, xx0, yy0, octaves):
    """Blend a soft-edged rigid noise disk into a float canvas (in place).

    xx0/yy0 are the coordinates of canvas[0, 0] and its sampling pitch is
    implied by the caller passing pre-scaled px/py/radius.
    """
    h, w = canvas.shape
    x0 = max(0, int(np.floor(px - radius - 2)) - xx0)
    x1 = min(w, int(np.ceil(px + radius + 3)) - xx0)
    y0 = max(0, int(np.floor(py - radius - 2)) - yy0)
    y1 = min(h, int(np.ceil(py + radius + 3)) - yy0)
    if x1 <= x0 or y1 <= y0:
        return
    ys, xs = np.indices((y1 - y0, x1 - x0), dtype=np.float64)
    sx = xs + (x0 + xx0) - px
    sy = ys + (y0 + yy0) - py
    dist = np.hypot(sx, sy)
    mask = np.clip((radius - dist) / 2.0 + 0.5, 0.0, 1.0)
    tex = fbm_2d(sx * freq, sy * freq, seed, octaves=octaves)
    region = canvas[y0:y1, x0:x1]
    region *= 1.0 - mask
    region += tex * mask


def _gen_dyndis(spec: SynthSpec):
    f0 = _base_freq(spec)
    xx, yy, cxx, cyy = _pixel_grids(spec)
    bg_luma = fbm_2d(xx * f0, yy * f0, mix64(spec.seed, 10))
    bg_u = fbm_2d(cxx * f0 * 0.5, cyy * f0 * 0.5, mix64(spec.seed, 11), octaves=2)
    bg_v = fbm_2d(cxx * f0 * 0.5, cyy * f0 * 0.5, mix64(spec.seed, 12), octaves=2)
    tracks = sprite_tracks(spec)

    frames = []
    for t in range(spec.n_frames):
        luma = bg_luma.copy()
        cu = bg_u.copy()
        cv = bg_v.copy()
        for i, track in enumerate(tracks):
            radius = track[0]
            ox, oy = _sprite_offset(track, t)
            px = track[1] + ox
            py = track[2] + oy
            _paint_sprite(luma, px, py, radius, f0 * 2.5,
                          mix64(spec.seed, 20, i), 0, 0, octaves=4)
            # chroma plane lives on the (2c + 0.5) luma lattice; reuse the
            # painter with half-resolution canvases and scaled geometry
            _paint_chroma_sprite(cu, px, py, radius, f0 * 1.25,
                                 mix64(spec.seed, 21, i))
            _paint_chroma_sprite(cv, px, py, radius, f0 * 1.25,
                                 mix64(spec.seed, 22, i))
        frames.append(Frame(_quantize_luma(luma), _quantize_chroma(cu),
                            _quantize_chroma(cv)))
    return frames


def _paint_chroma_sprite(canvas, px, py, radius, freq, seed):
    h, w = canvas.shape
    x0 = max(0, int(np.floor((px - radius - 2) / 2.0)))
    x1 = min(w, int(np.ceil((px + radius + 3) / 2.0)))
    y0 = max(0, int(np.floor((py - radius - 2) / 2.0)))
    y1 = min(h, int(np.ceil((py + radius + 3) / 2.0)))
    if x1 <= x0 or y1 <= y0:
        return
    ys, xs = np.indices((y1 - y0, x1 - x0), dtype=np.float64)
    sx = (xs + x0) * 2.0 + 0.5 - px
    sy = (ys + y0) * 2.0 + 0.5 - py
    dist = np.hypot(sx, sy)
    mask = np.clip((radius - dist) / 2.0 + 0.5, 0.0, 1.0)
    tex = fbm_2d(sx * freq, sy * freq, seed, octaves=2)
    region = canvas[y0:y1, x0:x1]
    region *= 1.0 - mask
    region += tex * mask


def _gen_dyncon(spec: SynthSpec):
    f0 = _base_freq(spec) * 1.4
    fd = spec.advect_turbulence / 24.0     # displacement field wavelength ~24 px
    z_disp = 1.0 / 5.0                     # displacement field evolution per frame
    z_tex = 1.0 / 8.0                      # appearance evolution per frame
    disp_amp = _DYNCON_DISP_SCALE * spec.motion_amplitude
    u_seed = mix64(spec.seed, 30)
    v_seed = mix64(spec.seed, 31)
    tex_seed = mix64(spec.seed, 32)
    cu_seed = mix64(spec.seed, 33)
    cv_seed = mix64(spec.seed, 34)

    xx, yy, cxx, cyy = _pixel_grids(spec)
    # displacement is smooth: evaluate on a stride-4 grid, upsample bilinearly
    stride = 4
    gyy, gxx = np.indices((spec.height // stride + 1, spec.width // stride + 1),
                          dtype=np.float64)
    gxx *= stride
    gyy *= stride

    frames = []
    for t in range(spec.n_frames):
        zd = t * z_disp
        du = disp_amp * fbm_3d(gxx * fd, gyy * fd, zd, u_seed, octaves=2)
        dv = disp_amp * fbm_3d(gxx * fd, gyy * fd, zd, v_seed, octaves=2)
        dx = _upsample_bilinear(du, stride, spec.height, spec.width)
        dy = _upsample_bilinear(dv, stride, spec.height, spec.width)
        luma = _quantize_luma(fbm_3d((xx + dx) * f0, (yy + dy) * f0,
                                     t * z_tex, tex_seed))
        cdx = dx[::2, ::2]
        cdy = dy[::2, ::2]
        cu = _quantize_chroma(fbm_3d((cxx + cdx) * f0 * 0.5,
                                     (cyy + cdy) * f0 * 0.5,
                                     t * z_tex, cu_seed, octaves=2))
        cv = _quantize_chroma(fbm_3d((cxx + cdx) * f0 * 0.5,
                                     (cyy + cdy) * f0 * 0.5,
                                     t * z_tex, cv_seed, octaves=2))
        frames.append(Frame(luma, cu, cv))
    return frames


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------

def corpus_specs(per_class: int, base_spec: SynthSpec | None = None, seed: int = 0,
                 role: str = "train") -> list[tuple[str, SynthSpec]]:
    """Named per-clip specs: 3 * per_class entries, class-major order.

    Per-clip seeds derive from (seed, role, class, index); amplitude, detail,
    sprite count and turbulence are jittered for intra-class diversity. Using
    distinct roles ("train"/"test") yields disjoint clip seeds and ids, which
    is how held-out evaluation stays honest.
    """
    if per_class < 1:
        raise InvalidSpec(f"per_class must be >= 1, got {per_class}")
    role_tag = mix64(*(ord(c) for c in role or "_"))
    out = []
    for ci, cls in enumerate(ALL_CLASSES):
        for i in range(per_class):
            clip_seed = mix64(seed, role_tag, ci, i)
            rng = np.random.default_rng(clip_seed)
            if base_spec is not None and base_spec.motion_amplitude > 0:
                base_amp = base_spec.motion_amplitude
            else:
                base_amp = CLASS_AMPLITUDE[cls]
            template = base_spec if base_spec is not None else SynthSpec(cls)
            spec = replace(
                template,
                texture_class=cls,
                motion_amplitude=base_amp * rng.uniform(0.75, 1.25),
                detail_scale=template.detail_scale * rng.uniform(0.8, 1.25),
                n_sprites=int(rng.integers(6, 10)),
                advect_turbulence=template.advect_turbulence * rng.uniform(0.8, 1.3),
                seed=clip_seed,
            )
            out.append((f"{cls.value}_{role}_{i:03d}", spec))
    return out


def synth_corpus(per_class: int, base_spec: SynthSpec | None = None, seed: int = 0,
                 role: str = "train") -> list[Clip]:
    """Materialize the full labelled corpus (see corpus_specs)."""
    return [synth_clip(spec, name=name)
            for name, spec in corpus_specs(per_class, base_spec, seed, role)]
