"""End-to-end orchestration: synth -> tune -> evaluate into one work directory.

Layout written under the work directory:

    clips/train/*.y4m, clips/test/*.y4m
    train.manifest.csv, test.manifest.csv
    profiles.txt
    report/scores_flat.csv, comparison.txt, stats.txt, distributions.csv,
           run_config.txt
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace

from .bench import BenchReport, Manifest, ManifestEntry, load_manifest, run_benchmark, save_manifest
from .config import RunConfig
from .media import write_y4m_file
from .parallel import map_ordered
from .report import emit_report
from .taxonomy import ALL_CLASSES, TextureClass
from .texgen import SynthSpec, corpus_specs, mix64, synth_clip
from .tuning import (
    ProfileMeta,
    TunedProfileSet,
    TuningSpec,
    tune_mixed,
    tune_profile,
)


def _synth_task(args):
    name, spec, path = args
    clip = synth_clip(spec, name=name)
    write_y4m_file(clip, path)
    return ManifestEntry(clip_id=name, path=os.path.relpath(path,
                                                            os.path.dirname(path)),
                         container="y4m", label=spec.texture_class)


def synth_corpus_to_dir(out_dir, per_class: int, seed: int, role: str,
                        base_spec: SynthSpec | None = None,
                        workers: int = 0) -> str:
    """Write a labelled corpus split and return the manifest path."""
    clip_dir = os.path.join(out_dir, "clips", role)
    os.makedirs(clip_dir, exist_ok=True)
    named = corpus_specs(per_class, base_spec, seed, role)
    tasks = [(name, spec, os.path.join(clip_dir, f"{name}.y4m"))
             for name, spec in named]
    entries = map_ordered(_synth_task, tasks, workers=workers)
    manifest_path = os.path.join(out_dir, f"{role}.manifest.csv")
    rel = os.path.relpath(clip_dir, out_dir)
    entries = [replace(e, path=os.path.join(rel, f"{e.clip_id}.y4m"))
               for e in entries]
    save_manifest(Manifest(entries=tuple(entries), root=out_dir), manifest_path)
    return manifest_path


def load_clips_by_class(manifest: Manifest):
    from .bench import load_entry_clip
    by_class: dict[TextureClass, list] = {c: [] for c in ALL_CLASSES}
    for entry in manifest.entries:
        clip = load_entry_clip(entry, manifest.root)
        if clip.label is None:
            raise ValueError(f"clip {entry.clip_id!r} has no class label; "
                             f"tuning needs labelled clips")
        by_class[clip.label].append(clip)
    return by_class


def tune_all_profiles(manifest: Manifest, config: RunConfig, seed: int,
                      rounds: int | None = None, workers: int = 0,
                      which: tuple[str, ...] = ("static", "dyndis", "dyncon",
                                                "mixed")) -> TunedProfileSet:
    """Tune the requested profiles on a labelled training manifest."""
    by_class = load_clips_by_class(manifest)
    base_spec = TuningSpec(
        triplets_per_round=config.tuning_triplets_per_round,
        rounds=rounds if rounds is not None else config.tuning_rounds,
        decay_rounds=config.tuning_decay_rounds,
        patch=config.tuning_patch,
        workers=workers,
    )
    profiles: dict[str, object] = {}
    meta: dict[str, ProfileMeta] = {}
    for i, cls in enumerate(ALL_CLASSES):
        if cls.value not in which:
            continue
        spec = replace(base_spec, seed=mix64(seed, 1 + i))
        profiles[cls.value], meta[cls.value] = tune_profile(by_class[cls], spec)
    if "mixed" in which:
        spec = replace(base_spec, seed=mix64(seed, 9))
        profiles["mixed"], meta["mixed"] = tune_mixed(by_class, spec,
                                                      config.tuning_mixing)
    return TunedProfileSet(profiles=profiles, meta=meta)


@dataclass(frozen=True)
class PipelineResult:
    train_manifest: str
    test_manifest: str
    profiles_path: str
    report_dir: str
    report: BenchReport


def run_full_pipeline(workdir, per_class: int = 12, seed: int = 0,
                      config: RunConfig = RunConfig(),
                      base_spec: SynthSpec | None = None) -> PipelineResult:
    """The whole benchmark: generate both splits, tune, evaluate held-out clips."""
    from .tuning import save_profiles

    os.makedirs(workdir, exist_ok=True)
    workers = config.bench_workers
    train_manifest_path = synth_corpus_to_dir(workdir, per_class, seed, "train",
                                              base_spec, workers)
    test_manifest_path = synth_corpus_to_dir(workdir, per_class, seed, "test",
                                             base_spec, workers)
    train_manifest = load_manifest(train_manifest_path)
    profiles = tune_all_profiles(train_manifest, config, seed, workers=workers)
    profiles_path = os.path.join(workdir, "profiles.txt")
    save_profiles(profiles, profiles_path)

    test_manifest = load_manifest(test_manifest_path)
    report = run_benchmark(test_manifest, profiles, config)
    report_dir = os.path.join(workdir, "report")
    emit_report(report, report_dir)
    return PipelineResult(train_manifest=train_manifest_path,
                          test_manifest=test_manifest_path,
                          profiles_path=profiles_path,
                          report_dir=report_dir,
                          report=report)
