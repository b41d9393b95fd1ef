"""Command-line surface.

Subcommands: synth, classify, tune, interpolate, evaluate, stats.
Exit codes: 0 success, 1 input/config error, 2 external-tool error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .bench import Manifest, load_entry_clip, load_manifest, run_benchmark
from .config import RunConfig, config_to_text, load_config
from .errors import TafiBenchError, ToolFailed
from .interp import DEFAULT_PARAMS, InterpParams, dump_motion_field, estimate_motion
from .media import Clip, read_y4m_file, write_y4m_file
from .pipeline import synth_corpus_to_dir, tune_all_profiles
from .report import emit_report, render_stats, report_from_flat
from .taxonomy import ALL_CLASSES
from .texclass import ClassifierThresholds, classify_clip, extract_features
from .texgen import SynthSpec, DEFAULT_FRAMES, DEFAULT_HEIGHT, DEFAULT_WIDTH
from .taxonomy import TextureClass
from .tuning import load_profiles, save_profiles
from .bench import reconstruct_clip
from .interp import interpolate
from .media import Frame


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_cfg(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    if getattr(args, "workers", None) is not None:
        cfg = replace(cfg, bench_workers=args.workers)
    if getattr(args, "allow_overlap", False):
        cfg = replace(cfg, bench_allow_overlap=True)
    if getattr(args, "routing", None):
        cfg = replace(cfg, bench_routing=args.routing)
    return cfg


def cmd_synth(args) -> int:
    base = None
    if (args.width, args.height, args.frames) != (DEFAULT_WIDTH, DEFAULT_HEIGHT,
                                                  DEFAULT_FRAMES):
        base = SynthSpec(texture_class=TextureClass.STATIC, width=args.width,
                         height=args.height, n_frames=args.frames,
                         motion_amplitude=0.0)
    for role in args.roles.split(","):
        manifest = synth_corpus_to_dir(args.out, args.per_class, args.seed,
                                       role.strip(), base, workers=args.workers or 0)
        print(f"wrote {manifest}")
    return 0


def cmd_classify(args) -> int:
    cfg = _load_cfg(args)
    thresholds = ClassifierThresholds(cfg.classifier_static_residual_max,
                                      cfg.classifier_incoherence_split)
    manifest = load_manifest(args.manifest)
    lines = ["clip_id,predicted,label"]
    for entry in manifest.entries:
        clip = load_entry_clip(entry, manifest.root)
        features = extract_features(clip, DEFAULT_PARAMS)
        from .texclass import classify
        pred = classify(features, thresholds)
        lines.append(f"{entry.clip_id},{pred.value},"
                     f"{entry.label.value if entry.label else ''}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_tune(args) -> int:
    cfg = _load_cfg(args)
    which = []
    if args.texture_class:
        which.extend(args.texture_class)
    if args.mixed:
        which.append("mixed")
    if not which:
        which = [c.value for c in ALL_CLASSES] + ["mixed"]
    manifest = load_manifest(args.manifest)
    profiles = tune_all_profiles(manifest, cfg, seed=args.seed, rounds=args.rounds,
                                 workers=args.workers or 0, which=tuple(which))
    save_profiles(profiles, args.out)
    print(f"wrote {args.out}")
    for key in ("static", "dyndis", "dyncon", "mixed"):
        if key in profiles.profiles:
            meta = profiles.meta[key]
            print(f"  {key}: loss={meta.final_loss:.4f} "
                  f"{profiles.profiles[key]}")
    return 0


def cmd_interpolate(args) -> int:
    clip = read_y4m_file(args.input)
    params = DEFAULT_PARAMS
    if args.profiles:
        ps = load_profiles(args.profiles)
        if args.profile not in ps.profiles:
            raise TafiBenchError(f"profile {args.profile!r} not in {args.profiles}")
        params = ps.profiles[args.profile]
    if args.triplet is not None:
        t = args.triplet
        if not 1 <= t <= len(clip) - 2:
            raise TafiBenchError(f"triplet index {t} outside [1, {len(clip) - 2}]")
        mid = interpolate(clip.frames[t - 1], clip.frames[t + 1], params)
        out_clip = Clip(name=clip.name, frames=(mid,), fps_num=clip.fps_num,
                        fps_den=clip.fps_den)
        if args.dump_motion:
            field = estimate_motion(clip.frames[t - 1], clip.frames[t + 1], params)
            with open(args.dump_motion, "w", encoding="utf-8") as fh:
                fh.write(dump_motion_field(field))
    else:
        out_clip = reconstruct_clip(clip, params)
        if args.dump_motion:
            field = estimate_motion(clip.frames[0], clip.frames[2], params)
            with open(args.dump_motion, "w", encoding="utf-8") as fh:
                fh.write(dump_motion_field(field))
    write_y4m_file(out_clip, args.output)
    print(f"wrote {args.output}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _load_cfg(args)
    manifest = load_manifest(args.manifest)
    profiles = load_profiles(args.profiles)
    report = run_benchmark(manifest, profiles, cfg)
    paths = emit_report(report, args.out)
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    return 0


def cmd_stats(args) -> int:
    with open(args.scores, encoding="utf-8") as fh:
        text = fh.read()
    report = report_from_flat(text, alpha=args.alpha)
    rendered = render_stats(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rendered)
    else:
        sys.stdout.write(rendered)
    return 0


def cmd_show_config(args) -> int:
    sys.stdout.write(config_to_text(_load_cfg(args)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tafibench",
                     description="texture-aware frame interpolation benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus and manifests")
    p.add_argument("--out", required=True)
    p.add_argument("--per-class", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--roles", default="train,test",
                   help="comma-separated corpus splits to generate")
    p.add_argument("--width", type=int, default=DEFAULT_WIDTH)
    p.add_argument("--height", type=int, default=DEFAULT_HEIGHT)
    p.add_argument("--frames", type=int, default=DEFAULT_FRAMES)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("classify", help="predict texture classes for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("tune", help="tune interpolation profiles on a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--class", dest="texture_class", action="append",
                   choices=[c.value for c in ALL_CLASSES],
                   help="tune only this class (repeatable)")
    p.add_argument("--mixed", action="store_true",
                   help="also tune the mixed profile")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--config")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("interpolate", help="interpolate a clip or one triplet")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--profiles")
    p.add_argument("--profile", default="baseline")
    p.add_argument("--triplet", type=int, default=None,
                   help="middle frame index; writes a single-frame clip")
    p.add_argument("--dump-motion", help="write the forward motion field here")
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("evaluate", help="run the benchmark and write reports")
    p.add_argument("--manifest", required=True)
    p.add_argument("--profiles", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--routing", choices=("label", "classifier", "both"))
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--allow-overlap", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="statistical tests over a flat scores table")
    p.add_argument("--scores", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("show-config", help="print the effective configuration")
    p.add_argument("--config")
    p.set_defaults(func=cmd_show_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolFailed as exc:
        print(f"external tool error: {exc}", file=sys.stderr)
        if exc.stderr:
            print(exc.stderr, file=sys.stderr)
        return 2
    except (TafiBenchError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
