#!/usr/bin/env python3
"""Run the whole benchmark end to end and print the comparison table.

Example:
    python scripts/run_pipeline.py --workdir /tmp/tafi_run --seed 0
"""
import argparse
import time
from dataclasses import replace

from tafibench.config import RunConfig, load_config
from tafibench.pipeline import run_full_pipeline
from tafibench.report import render_comparison, render_stats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", required=True)
    parser.add_argument("--per-class", type=int, default=12)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--config", help="key/value config file")
    parser.add_argument("--routing", choices=("label", "classifier", "both"),
                        default="both")
    parser.add_argument("--workers", type=int, default=0,
                        help="0 = one worker per CPU")
    args = parser.parse_args()

    cfg = RunConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    cfg = replace(cfg, bench_routing=args.routing, bench_workers=args.workers)

    t0 = time.perf_counter()
    result = run_full_pipeline(args.workdir, per_class=args.per_class,
                               seed=args.seed, config=cfg)
    elapsed = time.perf_counter() - t0

    print(f"\npipeline finished in {elapsed:.1f}s")
    print(f"profiles: {result.profiles_path}")
    print(f"report:   {result.report_dir}\n")
    print(render_comparison(result.report))
    print(render_stats(result.report))


if __name__ == "__main__":
    main()
