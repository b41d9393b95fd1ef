"""Evaluation protocol, corpus manifests and benchmark orchestration.

The protocol treats every second frame as ground truth: frames t-1 and t+1
are interpolated and scored against frame t for each odd t. Scores are
aggregated per sequence, grouped by texture class, and compared across
interpolator versions with ANOVA and pairwise Welch tests.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig
from .errors import (
    ClipTooShort,
    EmptyManifest,
    InvalidSpec,
    MissingFile,
    TrainTestOverlap,
)
from .interp import InterpMode, InterpParams, PairMotionContext, _interpolate_planes
from .media import Clip, Frame, read_raw_420, read_y4m_file
from .metrics import (
    VmafResult,
    VmafToolConfig,
    luma_mse,
    luma_ssim,
    psnr_from_mse,
    vmaf_external,
)
from .parallel import map_ordered
from .stats import AnovaResult, TTestResult, one_way_anova, welch_t_test
from .errors import InsufficientGroups, InsufficientSamples, ZeroVariance, ZeroWithinVariance
from .taxonomy import ALL_CLASSES, TextureClass, parse_texture_class
from .texclass import ClassifierThresholds, classify_clip
from .tuning import RoutedProfile, TunedProfileSet, route

#: Version keys, report order. The two composite keys route per clip.
CLASS_VERSIONS = ("static", "dyndis", "dyncon")
COMPOSITE_LABEL = "tafi"            # routed by ground-truth label
COMPOSITE_CLASSIFIER = "tafi_clf"   # routed by classifier prediction
METRICS = ("psnr", "ssim")
WELCH_PAIRS = (("dyndis", "dyncon"), ("static", "dyncon"), ("static", "dyndis"))


def metric_value(score: "SequenceScore", metric: str) -> float | None:
    if metric == "psnr":
        return score.mean_psnr
    if metric == "ssim":
        return score.mean_ssim
    if metric == "vmaf":
        return score.vmaf
    raise InvalidSpec(f"unknown metric {metric!r}")


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------

_MANIFEST_FIELDS = ("clip_id", "path", "container", "width", "height",
                    "fps_num", "fps_den", "label")


@dataclass(frozen=True)
class ManifestEntry:
    clip_id: str
    path: str
    container: str = "y4m"                 # y4m | raw
    width: int | None = None               # raw only
    height: int | None = None
    fps_num: int | None = None
    fps_den: int | None = None
    label: TextureClass | None = None

    def __post_init__(self):
        if self.container not in ("y4m", "raw"):
            raise InvalidSpec(f"container must be y4m|raw, got {self.container!r}")
        if self.container == "raw" and not (self.width and self.height
                                            and self.fps_num and self.fps_den):
            raise InvalidSpec(f"raw entry {self.clip_id!r} needs width/height/fps")


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]
    root: str = "."

    def __post_init__(self):
        ids = [e.clip_id for e in self.entries]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise InvalidSpec(f"duplicate clip ids in manifest: {dupes}")

    def clip_ids(self) -> list[str]:
        return [e.clip_id for e in self.entries]


def load_manifest(path) -> Manifest:
    if not os.path.exists(path):
        raise MissingFile(f"manifest not found: {path}")
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            entries.append(ManifestEntry(
                clip_id=row["clip_id"],
                path=row["path"],
                container=row.get("container") or "y4m",
                width=int(row["width"]) if row.get("width") else None,
                height=int(row["height"]) if row.get("height") else None,
                fps_num=int(row["fps_num"]) if row.get("fps_num") else None,
                fps_den=int(row["fps_den"]) if row.get("fps_den") else None,
                label=parse_texture_class(row["label"]) if row.get("label") else None,
            ))
    return Manifest(entries=tuple(entries), root=os.path.dirname(os.path.abspath(path)))


def save_manifest(manifest: Manifest, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_MANIFEST_FIELDS)
        for e in manifest.entries:
            writer.writerow([
                e.clip_id, e.path, e.container,
                e.width or "", e.height or "", e.fps_num or "", e.fps_den or "",
                e.label.value if e.label else "",
            ])


def load_entry_clip(entry: ManifestEntry, root: str) -> Clip:
    path = entry.path if os.path.isabs(entry.path) else os.path.join(root, entry.path)
    if not os.path.exists(path):
        raise MissingFile(f"clip file not found: {path}")
    if entry.container == "y4m":
        return read_y4m_file(path, name=entry.clip_id, label=entry.label)
    with open(path, "rb") as fh:
        return read_raw_420(fh.read(), entry.width, entry.height,
                            entry.fps_num, entry.fps_den,
                            name=entry.clip_id, label=entry.label)


# ---------------------------------------------------------------------------
# per-clip evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricRecord:
    clip_id: str
    frame_index: int
    psnr: float
    ssim: float
    capped: bool


@dataclass(frozen=True)
class SequenceScore:
    clip_id: str
    label: TextureClass | None
    predicted: TextureClass | None
    records: tuple[MetricRecord, ...]
    mean_psnr: float
    mean_ssim: float
    vmaf: float | None = None
    vmaf_tool_version: str | None = None
    routed_profile: str | None = None     # composite versions only

    @property
    def frames_evaluated(self) -> int:
        return len(self.records)


def _gt_indices(n_frames: int) -> range:
    return range(1, n_frames - 1, 2)


def evaluate_clip(clip: Clip, params: InterpParams,
                  vmaf_tool: VmafToolConfig | None = None) -> SequenceScore:
    """Score one configuration on one clip under the every-second-frame protocol."""
    scores = evaluate_clip_multi(clip, [params], vmaf_tool=vmaf_tool)
    return scores[0]


def evaluate_clip_multi(clip: Clip, params_list: list[InterpParams],
                        vmaf_tool: VmafToolConfig | None = None) -> list[SequenceScore]:
    """Score several configurations in one pass, sharing block-matching work."""
    if len(clip) < 3:
        raise ClipTooShort(f"clip {clip.name!r} has {len(clip)} frames, need >= 3")
    need_frames = vmaf_tool is not None and bool(vmaf_tool.command)
    records: list[list[MetricRecord]] = [[] for _ in params_list]
    recon: list[list[Frame]] | None = None
    if need_frames:
        recon = [list(clip.frames) for _ in params_list]

    for t in _gt_indices(len(clip)):
        prev, gt, nxt = clip.frames[t - 1], clip.frames[t], clip.frames[t + 1]
        ctx_f = PairMotionContext(prev.luma, nxt.luma)
        ctx_b = PairMotionContext(nxt.luma, prev.luma)
        ctx_f.prewarm(params_list)
        ctx_b.prewarm(params_list)
        for j, params in enumerate(params_list):
            planes = _interpolate_planes(prev, nxt, params,
                                         luma_only=not need_frames,
                                         ctx_fwd=ctx_f, ctx_bwd=ctx_b)
            mse = luma_mse(planes[0], gt.luma)
            records[j].append(MetricRecord(
                clip_id=clip.name, frame_index=t,
                psnr=psnr_from_mse(mse),
                ssim=luma_ssim(planes[0], gt.luma),
                capped=mse == 0.0,
            ))
            if need_frames:
                recon[j][t] = Frame(*planes)

    out = []
    for j in range(len(params_list)):
        recs = tuple(records[j])
        vmaf_score: VmafResult | None = None
        if need_frames:
            recon_clip = replace(clip, frames=tuple(recon[j]))
            vmaf_score = vmaf_external(clip, recon_clip, vmaf_tool)
        out.append(SequenceScore(
            clip_id=clip.name, label=clip.label, predicted=None, records=recs,
            mean_psnr=float(np.mean([r.psnr for r in recs])),
            mean_ssim=float(np.mean([r.ssim for r in recs])),
            vmaf=vmaf_score.score if vmaf_score else None,
            vmaf_tool_version=vmaf_score.tool_version if vmaf_score else None,
        ))
    return out


def reconstruct_clip(clip: Clip, params: InterpParams) -> Clip:
    """Replace every odd frame by its interpolation; even frames pass through."""
    if len(clip) < 3:
        raise ClipTooShort(f"clip {clip.name!r} has {len(clip)} frames, need >= 3")
    frames = list(clip.frames)
    for t in _gt_indices(len(clip)):
        planes = _interpolate_planes(clip.frames[t - 1], clip.frames[t + 1],
                                     params, luma_only=False)
        frames[t] = Frame(*planes)
    return replace(clip, frames=tuple(frames))


# ---------------------------------------------------------------------------
# benchmark
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StatBlock:
    anova: AnovaResult | None
    anova_note: str
    welch: dict[tuple[str, str], TTestResult | None]


@dataclass(frozen=True)
class BenchReport:
    versions: tuple[str, ...]
    metrics: tuple[str, ...]                       # psnr, ssim [, vmaf]
    scores: dict[str, tuple[SequenceScore, ...]]   # version -> manifest order
    aggregates: dict[tuple[str, str, str], float]  # (version, group, metric) -> mean
    deltas: dict[tuple[str, str, str], float]      # same keys, minus baseline
    stat_tests: dict[tuple[str, str], StatBlock]   # (version, metric)
    config_echo: tuple[tuple[str, str], ...]
    alpha: float

    def groups(self) -> tuple[str, ...]:
        return tuple(c.value for c in ALL_CLASSES) + ("overall",)


def _effective_class(score: SequenceScore) -> TextureClass | None:
    return score.label if score.label is not None else score.predicted


def present_metrics(scores_by_version: dict[str, tuple[SequenceScore, ...]]):
    has_vmaf = any(s.vmaf is not None
                   for scores in scores_by_version.values() for s in scores)
    return METRICS + ("vmaf",) if has_vmaf else METRICS


def sequence_aggregates(scores_by_version: dict[str, tuple[SequenceScore, ...]],
                        metrics: tuple[str, ...] = METRICS):
    """Sequence-level means per (version, class-or-overall, metric)."""
    aggregates: dict[tuple[str, str, str], float] = {}
    for version, scores in scores_by_version.items():
        for metric in metrics:
            overall = [metric_value(s, metric) for s in scores
                       if metric_value(s, metric) is not None]
            for cls in ALL_CLASSES:
                vals = [metric_value(s, metric) for s in scores
                        if _effective_class(s) is cls
                        and metric_value(s, metric) is not None]
                if vals:
                    aggregates[(version, cls.value, metric)] = float(np.mean(vals))
            if overall:
                aggregates[(version, "overall", metric)] = float(np.mean(overall))
    return aggregates


def _stat_block(scores: tuple[SequenceScore, ...], metric: str) -> StatBlock:
    groups = {}
    for cls in ALL_CLASSES:
        groups[cls.value] = [metric_value(s, metric) for s in scores
                             if _effective_class(s) is cls
                             and metric_value(s, metric) is not None]
    anova = None
    note = ""
    try:
        anova = one_way_anova([groups[c.value] for c in ALL_CLASSES])
    except (InsufficientGroups, InsufficientSamples, ZeroWithinVariance) as exc:
        note = type(exc).__name__
    welch: dict[tuple[str, str], TTestResult | None] = {}
    for a, b in WELCH_PAIRS:
        try:
            welch[(a, b)] = welch_t_test(groups[a], groups[b])
        except (InsufficientSamples, ZeroVariance):
            welch[(a, b)] = None
    return StatBlock(anova=anova, anova_note=note, welch=welch)


def _resolve_versions(profiles: TunedProfileSet, routing: str) -> list[str]:
    versions = ["baseline"]
    versions += [k for k in CLASS_VERSIONS if k in profiles.profiles]
    if "mixed" in profiles.profiles:
        versions.append("mixed")
    if routing in ("label", "both"):
        versions.append(COMPOSITE_LABEL)
    if routing in ("classifier", "both"):
        versions.append(COMPOSITE_CLASSIFIER)
    return versions


def _clip_task(args):
    (entry, root, versions, profiles, thresholds, params_by_version,
     needs_classifier, vmaf_tool) = args
    clip = load_entry_clip(entry, root)
    predicted = None
    if needs_classifier or clip.label is None:
        predicted = classify_clip(clip, profiles.profiles["baseline"], thresholds)

    routed: dict[str, RoutedProfile] = {}
    resolved: dict[str, InterpParams] = {}
    for version in versions:
        if version == COMPOSITE_LABEL:
            cls = clip.label if clip.label is not None else predicted
            r = route(profiles, cls)
            routed[version] = r
            resolved[version] = r.params
        elif version == COMPOSITE_CLASSIFIER:
            r = route(profiles, predicted)
            routed[version] = r
            resolved[version] = r.params
        else:
            resolved[version] = params_by_version[version]

    unique: list[InterpParams] = []
    for p in resolved.values():
        if p not in unique:
            unique.append(p)
    scored = evaluate_clip_multi(clip, unique, vmaf_tool=vmaf_tool)
    by_params = dict(zip(unique, scored))

    out = {}
    for version in versions:
        score = by_params[resolved[version]]
        out[version] = replace(
            score, predicted=predicted,
            routed_profile=routed[version].used if version in routed else None)
    return out


def run_benchmark(manifest: Manifest, profiles: TunedProfileSet,
                  config: RunConfig = RunConfig()) -> BenchReport:
    """Evaluate every clip under every version and assemble the full report."""
    if not manifest.entries:
        raise EmptyManifest("manifest has no entries")
    overlap = profiles.tuning_clip_ids() & set(manifest.clip_ids())
    if overlap and not config.bench_allow_overlap:
        raise TrainTestOverlap(
            f"{len(overlap)} manifest clip(s) were used for tuning "
            f"(e.g. {sorted(overlap)[:3]}); pass allow-overlap to override")

    versions = _resolve_versions(profiles, config.bench_routing)
    thresholds = ClassifierThresholds(config.classifier_static_residual_max,
                                      config.classifier_incoherence_split)
    params_by_version = {v: profiles.profiles[v] for v in versions
                         if v in profiles.profiles}
    needs_classifier = COMPOSITE_CLASSIFIER in versions
    vmaf_tool = (VmafToolConfig(config.vmaf_command, config.vmaf_score_key,
                                config.vmaf_version_key)
                 if config.vmaf_command else None)

    tasks = [(entry, manifest.root, versions, profiles, thresholds,
              params_by_version, needs_classifier, vmaf_tool)
             for entry in manifest.entries]
    per_clip = map_ordered(_clip_task, tasks, workers=config.bench_workers)

    scores = {v: tuple(row[v] for row in per_clip) for v in versions}
    metrics = present_metrics(scores)
    aggregates = sequence_aggregates(scores, metrics)
    deltas = {}
    for (version, group, metric), value in aggregates.items():
        base = aggregates.get(("baseline", group, metric))
        if version != "baseline" and base is not None:
            deltas[(version, group, metric)] = value - base
    stat_tests = {(v, m): _stat_block(scores[v], m)
                  for v in versions for m in metrics}

    echo = [
        ("bench.routing", config.bench_routing),
        ("bench.workers", str(config.bench_workers)),
        ("bench.allow_overlap", str(config.bench_allow_overlap).lower()),
        ("stats.alpha", repr(config.alpha)),
        ("classifier.static_residual_max",
         repr(config.classifier_static_residual_max)),
        ("classifier.incoherence_split", repr(config.classifier_incoherence_split)),
        ("vmaf.command", config.vmaf_command or "(not configured)"),
    ]
    for key in ("static", "dyndis", "dyncon", "mixed"):
        meta = profiles.meta.get(key)
        if meta is not None and meta.seed is not None:
            echo.append((f"profiles.{key}.seed", str(meta.seed)))
    return BenchReport(versions=tuple(versions), metrics=metrics, scores=scores,
                       aggregates=aggregates, deltas=deltas,
                       stat_tests=stat_tests, config_echo=tuple(echo),
                       alpha=config.alpha)
