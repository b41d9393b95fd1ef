"""Per-texture specialization: triplet sampling, augmentation, profile tuning.

"Training" a profile is a seeded coordinate descent over the interpolator's
configuration space against mean absolute luma error on sampled triplets.
The schedule mirrors a short fine-tune: a fixed number of rounds, one
parameter field optimized per round (fields cycling in declared order), and
candidate lists shrinking to the winner's neighborhood on a fixed decay
cadence. Everything is a pure function of (clips, spec.seed).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ClipTooShort,
    EmptyClipList,
    InvalidSpec,
    OddGeometry,
    PatchTooLarge,
)
from .config import format_kv, parse_kv_text
from .interp import (
    DEFAULT_PARAMS,
    BlendMode,
    InterpMode,
    InterpParams,
    ObmcMode,
    PairMotionContext,
    interpolate_luma,
    params_from_dict,
    params_to_dict,
)
from .media import Clip, Frame, extract_patch
from .parallel import chunked, map_ordered
from .taxonomy import ALL_CLASSES, TextureClass
from .texgen import mix64

#: Candidate values per configuration field; dict order is the cycling order.
#: The mode decision leads so texture classes that defeat motion compensation
#: settle into frame averaging immediately.
DEFAULT_SEARCH_SPACE: dict[str, tuple] = {
    "mode": (InterpMode.MCI, InterpMode.FRAME_AVERAGE),
    "block_size": (8, 16, 32),
    "search_range": (2, 4, 8),
    "smoothness_lambda": (0.0, 16.0, 64.0),
    "obmc": (ObmcMode.OFF, ObmcMode.RAISED_COSINE),
    "blend": (BlendMode.AVERAGE, BlendMode.SAD_WEIGHTED),
}

#: Profile keys in canonical file/report order.
PROFILE_KEYS = ("baseline", "static", "dyndis", "dyncon", "mixed")


@dataclass(frozen=True, eq=False)
class Triplet:
    """Three co-located patches around ground-truth middle frame t."""

    prev: Frame
    mid: Frame
    next: Frame
    clip_id: str
    t: int
    x: int
    y: int


@dataclass(frozen=True)
class TuningSpec:
    search_space: dict[str, tuple] = field(
        default_factory=lambda: dict(DEFAULT_SEARCH_SPACE))
    triplets_per_round: int = 200
    rounds: int = 10
    decay_rounds: int = 4
    patch: int = 96
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.rounds < 1:
            raise InvalidSpec(f"rounds must be >= 1, got {self.rounds}")
        if self.decay_rounds < 1:
            raise InvalidSpec(f"decay_rounds must be >= 1, got {self.decay_rounds}")
        if self.triplets_per_round < 1:
            raise InvalidSpec("triplets_per_round must be >= 1")
        if self.patch < 16 or self.patch % 2:
            raise InvalidSpec(f"patch must be even and >= 16, got {self.patch}")
        if not self.search_space:
            raise InvalidSpec("search space is empty")
        valid_fields = set(params_to_dict(DEFAULT_PARAMS))
        for name, candidates in self.search_space.items():
            if name not in valid_fields:
                raise InvalidSpec(f"unknown parameter field {name!r}")
            if not candidates:
                raise InvalidSpec(f"empty candidate list for {name!r}")


# ---------------------------------------------------------------------------
# sampling and augmentation
# ---------------------------------------------------------------------------

def sample_triplets(clips: list[Clip], n: int, patch: int, seed: int) -> list[Triplet]:
    """n random triplets: clip uniform, then t, then an even-aligned origin."""
    _check_sampling_inputs(clips, patch)
    if n == 0:
        return []
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        clip = clips[int(rng.integers(len(clips)))]
        out.append(_draw_triplet(clip, patch, rng))
    return out


def sample_triplets_balanced(clips_by_class: dict[TextureClass, list[Clip]],
                             n: int, patch: int, seed: int) -> list[Triplet]:
    """Round-robin over classes, then clip uniform within the class."""
    order = [c for c in ALL_CLASSES if clips_by_class.get(c)]
    if not order:
        raise EmptyClipList("no clips supplied")
    for cls in order:
        _check_sampling_inputs(clips_by_class[cls], patch)
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        pool = clips_by_class[order[i % len(order)]]
        clip = pool[int(rng.integers(len(pool)))]
        out.append(_draw_triplet(clip, patch, rng))
    return out


def _check_sampling_inputs(clips: list[Clip], patch: int) -> None:
    if not clips:
        raise EmptyClipList("no clips supplied")
    if patch % 2:
        raise OddGeometry(f"patch size must be even, got {patch}")
    for clip in clips:
        if len(clip) < 3:
            raise ClipTooShort(f"clip {clip.name!r} has {len(clip)} frames")
        if clip.width < patch or clip.height < patch:
            raise PatchTooLarge(f"patch {patch} exceeds clip {clip.name!r} "
                                f"({clip.width}x{clip.height})")


def _draw_triplet(clip: Clip, patch: int, rng: np.random.Generator) -> Triplet:
    t = int(rng.integers(1, len(clip) - 1))
    x = int(rng.integers(0, (clip.width - patch) // 2 + 1)) * 2
    y = int(rng.integers(0, (clip.height - patch) // 2 + 1)) * 2
    return Triplet(
        prev=extract_patch(clip.frames[t - 1], x, y, patch, patch),
        mid=extract_patch(clip.frames[t], x, y, patch, patch),
        next=extract_patch(clip.frames[t + 1], x, y, patch, patch),
        clip_id=clip.name, t=t, x=x, y=y,
    )


@dataclass(frozen=True)
class AugmentDraws:
    hflip: bool
    vflip: bool
    temporal_reverse: bool
    gain: float      # luma gain in [0.9, 1.1]
    offset: float    # luma offset in [-10, 10]

    @staticmethod
    def identity() -> "AugmentDraws":
        return AugmentDraws(False, False, False, 1.0, 0.0)


def draw_augment(seed: int) -> AugmentDraws:
    rng = np.random.default_rng(seed)
    flips = rng.random(3) < 0.5
    return AugmentDraws(bool(flips[0]), bool(flips[1]), bool(flips[2]),
                        float(rng.uniform(0.9, 1.1)), float(rng.uniform(-10.0, 10.0)))


def apply_augment(triplet: Triplet, draws: AugmentDraws) -> Triplet:
    frames = [triplet.prev, triplet.mid, triplet.next]
    if draws.temporal_reverse:
        frames = [frames[2], frames[1], frames[0]]
    frames = [_augment_frame(f, draws) for f in frames]
    return replace(triplet, prev=frames[0], mid=frames[1], next=frames[2])


def augment(triplet: Triplet, seed: int) -> Triplet:
    """Flips/temporal reversal with probability 1/2 each, jitter always applied."""
    return apply_augment(triplet, draw_augment(seed))


def _augment_frame(f: Frame, d: AugmentDraws) -> Frame:
    planes = [f.luma, f.chroma_u, f.chroma_v]
    if d.hflip:
        planes = [p[:, ::-1] for p in planes]
    if d.vflip:
        planes = [p[::-1, :] for p in planes]
    luma = planes[0]
    if d.gain != 1.0 or d.offset != 0.0:
        luma = np.clip(np.rint(luma.astype(np.float64) * d.gain + d.offset),
                       0, 255).astype(np.uint8)
    # jitter touches luma only; chroma just follows the geometry
    return Frame(np.ascontiguousarray(luma),
                 np.ascontiguousarray(planes[1]),
                 np.ascontiguousarray(planes[2]))


# ---------------------------------------------------------------------------
# tuning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProfileMeta:
    final_loss: float | None = None    # mean |luma error| on the final batch
    seed: int | None = None
    triplet_count: int = 0
    clip_ids: tuple[str, ...] = ()
    baseline_guard: bool = False       # final result replaced by the baseline


def _params_with(current: dict, **override) -> InterpParams:
    d = dict(current)
    d.update(override)
    return InterpParams(**d)


def _eval_chunk(args) -> np.ndarray:
    """Sum |interpolated - mid| over a triplet chunk, one total per candidate."""
    triplets, candidates = args
    sums = np.zeros(len(candidates), dtype=np.int64)
    for tr in triplets:
        ctx_f = PairMotionContext(tr.prev.luma, tr.next.luma)
        ctx_b = PairMotionContext(tr.next.luma, tr.prev.luma)
        ctx_f.prewarm(candidates)
        ctx_b.prewarm(candidates)
        mid = tr.mid.luma.astype(np.int16)
        for j, params in enumerate(candidates):
            pred = interpolate_luma(tr.prev, tr.next, params, ctx_f, ctx_b)
            sums[j] += int(np.abs(pred.astype(np.int16) - mid).sum(dtype=np.int64))
    return sums


def _batch_losses(batch: list[Triplet], candidates: list[InterpParams],
                  workers: int) -> np.ndarray:
    """Mean absolute luma error per candidate; exact integer reduction."""
    chunks = chunked(batch, max(1, min(len(batch) // 4, 4 * max(1, workers))))
    parts = map_ordered(_eval_chunk, [(c, candidates) for c in chunks],
                        workers=workers)
    totals = np.sum(np.stack(parts), axis=0)
    px = len(batch) * batch[0].mid.luma.size
    return totals.astype(np.float64) / px


def tune_profile(class_clips: list[Clip], spec: TuningSpec) -> tuple[InterpParams, ProfileMeta]:
    """Coordinate descent on one clip pool (one texture class, or any mix)."""
    return _tune(class_clips, None, spec)


def tune_mixed(clips_by_class: dict[TextureClass, list[Clip]], spec: TuningSpec,
               mixing: str = "proportional") -> tuple[InterpParams, ProfileMeta]:
    """Tune on the union of all classes; proportional or balanced sampling."""
    merged = [c for cls in ALL_CLASSES for c in clips_by_class.get(cls, [])]
    if mixing == "proportional":
        return _tune(merged, None, spec)
    if mixing == "balanced":
        return _tune(merged, clips_by_class, spec)
    raise InvalidSpec(f"mixing must be proportional|balanced, got {mixing!r}")


def _tune(clips: list[Clip], clips_by_class, spec: TuningSpec) -> tuple[InterpParams, ProfileMeta]:
    if not clips:
        raise EmptyClipList("no clips to tune on")
    _check_sampling_inputs(clips, spec.patch)

    space = {name: list(cands) for name, cands in spec.search_space.items()}
    defaults = {name: getattr(DEFAULT_PARAMS, name) for name in space}
    current = {name: (defaults[name] if defaults[name] in cands else cands[0])
               for name, cands in space.items()}
    baseline_representable = all(defaults[name] in cands
                                 for name, cands in spec.search_space.items())
    fields_cycle = list(space)

    final_batch: list[Triplet] = []
    final_loss = np.inf
    for round_idx in range(spec.rounds):
        batch_seed = mix64(spec.seed, 0xBA7C, round_idx)
        if clips_by_class is not None:
            batch = sample_triplets_balanced(clips_by_class, spec.triplets_per_round,
                                             spec.patch, batch_seed)
        else:
            batch = sample_triplets(clips, spec.triplets_per_round,
                                    spec.patch, batch_seed)
        batch = [augment(tr, mix64(spec.seed, 0xA0A0, round_idx, i))
                 for i, tr in enumerate(batch)]
        final_batch = batch

        name = fields_cycle[round_idx % len(fields_cycle)]
        cands = space[name]
        incumbent_idx = cands.index(current[name])
        candidates = [_params_with(current, **{name: value}) for value in cands]
        losses = _batch_losses(batch, candidates, spec.workers)
        # incumbent wins ties; among challengers, earlier in the list wins
        best_idx = incumbent_idx
        for j in range(len(cands)):
            if losses[j] < losses[best_idx]:
                best_idx = j
        current[name] = cands[best_idx]
        final_loss = float(losses[best_idx])

        if (round_idx + 1) % spec.decay_rounds == 0:
            for fname, flist in space.items():
                idx = flist.index(current[fname])
                space[fname] = flist[max(0, idx - 1):idx + 2]

    tuned = _params_with(current)
    guard = False
    if baseline_representable and tuned != DEFAULT_PARAMS:
        base_loss = float(_batch_losses(final_batch, [DEFAULT_PARAMS],
                                        spec.workers)[0])
        if base_loss < final_loss:
            tuned = DEFAULT_PARAMS
            final_loss = base_loss
            guard = True

    meta = ProfileMeta(final_loss=final_loss, seed=spec.seed,
                       triplet_count=spec.rounds * spec.triplets_per_round,
                       clip_ids=tuple(c.name for c in clips),
                       baseline_guard=guard)
    return tuned, meta


# ---------------------------------------------------------------------------
# profile sets and routing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TunedProfileSet:
    """Profiles keyed by baseline/static/dyndis/dyncon/mixed.

    The three class entries jointly form the texture-aware composite; the
    baseline entry is always present.
    """

    profiles: dict[str, InterpParams]
    meta: dict[str, ProfileMeta]

    def __post_init__(self):
        for key in self.profiles:
            if key not in PROFILE_KEYS:
                raise InvalidSpec(f"unknown profile key {key!r}")
        if "baseline" not in self.profiles:
            profiles = {"baseline": DEFAULT_PARAMS, **self.profiles}
            object.__setattr__(self, "profiles", profiles)
        self.meta.setdefault("baseline", ProfileMeta())

    def tuning_clip_ids(self) -> set[str]:
        ids: set[str] = set()
        for meta in self.meta.values():
            ids.update(meta.clip_ids)
        return ids


@dataclass(frozen=True)
class RoutedProfile:
    params: InterpParams
    requested: str
    used: str

    @property
    def fell_back(self) -> bool:
        return self.requested != self.used


def route(profiles: TunedProfileSet, texture_class: TextureClass) -> RoutedProfile:
    """Class entry if present, else mixed, else baseline."""
    requested = texture_class.value
    for key in (requested, "mixed", "baseline"):
        if key in profiles.profiles:
            return RoutedProfile(params=profiles.profiles[key],
                                 requested=requested, used=key)
    raise InvalidSpec("profile set has no baseline entry")   # unreachable


# ---------------------------------------------------------------------------
# profile files
# ---------------------------------------------------------------------------

def profiles_to_text(ps: TunedProfileSet) -> str:
    items: list[tuple[str, str]] = []
    for key in PROFILE_KEYS:
        if key not in ps.profiles:
            continue
        for fname, fval in params_to_dict(ps.profiles[key]).items():
            items.append((f"profile.{key}.params.{fname}", fval))
        meta = ps.meta.get(key, ProfileMeta())
        items.append((f"profile.{key}.meta.final_loss",
                      "none" if meta.final_loss is None else repr(meta.final_loss)))
        items.append((f"profile.{key}.meta.seed",
                      "none" if meta.seed is None else str(meta.seed)))
        items.append((f"profile.{key}.meta.triplet_count", str(meta.triplet_count)))
        items.append((f"profile.{key}.meta.clip_ids", ",".join(meta.clip_ids)))
        items.append((f"profile.{key}.meta.baseline_guard",
                      "true" if meta.baseline_guard else "false"))
    return format_kv(items, header="tafibench tuned interpolation profiles")


def profiles_from_text(text: str) -> TunedProfileSet:
    kv = parse_kv_text(text)
    grouped: dict[str, dict[str, str]] = {}
    for key, value in kv.items():
        parts = key.split(".")
        if len(parts) != 4 or parts[0] != "profile":
            raise InvalidSpec(f"bad profile key {key!r}")
        grouped.setdefault(parts[1], {})[f"{parts[2]}.{parts[3]}"] = value
    profiles: dict[str, InterpParams] = {}
    meta: dict[str, ProfileMeta] = {}
    for name, entries in grouped.items():
        params_kv = {k.split(".", 1)[1]: v for k, v in entries.items()
                     if k.startswith("params.")}
        profiles[name] = params_from_dict(params_kv)
        loss = entries.get("meta.final_loss", "none")
        seed = entries.get("meta.seed", "none")
        ids = entries.get("meta.clip_ids", "")
        meta[name] = ProfileMeta(
            final_loss=None if loss == "none" else float(loss),
            seed=None if seed == "none" else int(seed),
            triplet_count=int(entries.get("meta.triplet_count", "0")),
            clip_ids=tuple(s for s in ids.split(",") if s),
            baseline_guard=entries.get("meta.baseline_guard", "false") == "true",
        )
    return TunedProfileSet(profiles=profiles, meta=meta)


def save_profiles(ps: TunedProfileSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(profiles_to_text(ps))


def load_profiles(path) -> TunedProfileSet:
    with open(path, encoding="utf-8") as fh:
        return profiles_from_text(fh.read())
