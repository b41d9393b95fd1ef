"""Report files: flat per-frame scores, comparison table, statistics block,
and distribution summaries for external box plotting.

Aggregates render to 2 decimals; the flat table keeps full precision so every
rendered number can be recomputed from it.
"""
from __future__ import annotations

import csv
import io
import os

import numpy as np

from .bench import BenchReport, StatBlock, metric_value
from .errors import WriteFailed
from .stats import AnovaResult, TTestResult

FLAT_SCORES_NAME = "scores_flat.csv"
COMPARISON_NAME = "comparison.txt"
STATS_NAME = "stats.txt"
DISTRIBUTIONS_NAME = "distributions.csv"
CONFIG_ECHO_NAME = "run_config.txt"


def format_mean_cell(value: float, delta: float | None) -> str:
    """Comparison cell: '28.51(+0.31)' against the baseline, or plain mean."""
    if delta is None:
        return f"{value:.2f}"
    return f"{value:.2f}({delta:+.2f})"


def format_p(p: float) -> str:
    return f"p={p:.2f}"


def format_anova(a: AnovaResult) -> str:
    return f"F({a.df_between},{a.df_within})={a.f_stat:.2f}, {format_p(a.p_value)}"


def format_welch(t: TTestResult) -> str:
    # fractional df is kept in the data; display rounds to an integer
    return f"t({round(t.df)})={t.t_stat:.2f}, {format_p(t.p_value)}"


def five_number_summary(values) -> tuple[float, float, float, float, float]:
    q = np.percentile(np.asarray(values, dtype=np.float64), [0, 25, 50, 75, 100])
    return tuple(float(v) for v in q)


def render_comparison(report: BenchReport) -> str:
    groups = report.groups()
    header = ["version"]
    for group in groups:
        for metric in report.metrics:
            header.append(f"{group}-{metric}")
    rows = [header]
    best: dict[tuple[str, str], str] = {}
    for group in groups:
        for metric in report.metrics:
            candidates = {v: report.aggregates.get((v, group, metric))
                          for v in report.versions}
            candidates = {v: x for v, x in candidates.items() if x is not None}
            if candidates:
                best[(group, metric)] = max(candidates, key=candidates.get)
    for version in report.versions:
        row = [version]
        for group in groups:
            for metric in report.metrics:
                value = report.aggregates.get((version, group, metric))
                if value is None:
                    row.append("-")
                    continue
                cell = format_mean_cell(value,
                                        report.deltas.get((version, group, metric)))
                if best.get((group, metric)) == version:
                    cell = "*" + cell
                row.append(cell)
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in rows]
    lines.append("")
    lines.append("* best value in column; (...) change vs baseline")
    return "\n".join(lines) + "\n"


def render_stats(report: BenchReport) -> str:
    lines = [f"significance level alpha = {report.alpha}"]
    for version in report.versions:
        lines.append("")
        lines.append(f"[{version}]")
        for metric in report.metrics:
            block: StatBlock = report.stat_tests[(version, metric)]
            if block.anova is not None:
                verdict = ("significant" if block.anova.p_value < report.alpha
                           else "not significant")
                lines.append(f"  {metric} anova across classes: "
                             f"{format_anova(block.anova)} ({verdict})")
            else:
                lines.append(f"  {metric} anova across classes: "
                             f"unavailable ({block.anova_note})")
            for (a, b), result in block.welch.items():
                if result is None:
                    lines.append(f"  {metric} {a} vs {b}: unavailable")
                else:
                    lines.append(f"  {metric} {a} vs {b}: {format_welch(result)}")
    return "\n".join(lines) + "\n"


def render_flat_scores(report: BenchReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["version", "clip_id", "label", "predicted", "routed_profile",
                     "frame_index", "psnr", "ssim", "capped", "clip_vmaf"])
    for version in report.versions:
        for score in report.scores[version]:
            label = score.label.value if score.label else ""
            predicted = score.predicted.value if score.predicted else ""
            routed = score.routed_profile or ""
            vmaf = repr(score.vmaf) if score.vmaf is not None else ""
            for rec in score.records:
                writer.writerow([version, score.clip_id, label, predicted, routed,
                                 rec.frame_index, repr(rec.psnr), repr(rec.ssim),
                                 int(rec.capped), vmaf])
    return buf.getvalue()


def render_distributions(report: BenchReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["version", "class", "metric", "n",
                     "min", "q1", "median", "q3", "max"])
    for version in report.versions:
        scores = report.scores[version]
        for group in report.groups():
            if group == "overall":
                sel = list(scores)
            else:
                sel = [s for s in scores
                       if (s.label.value if s.label else
                           (s.predicted.value if s.predicted else "")) == group]
            if not sel:
                continue
            for metric in report.metrics:
                vals = [metric_value(s, metric) for s in sel
                        if metric_value(s, metric) is not None]
                if not vals:
                    continue
                summary = five_number_summary(vals)
                writer.writerow([version, group, metric, len(vals)]
                                + [repr(v) for v in summary])
    return buf.getvalue()


def render_config_echo(report: BenchReport) -> str:
    lines = [f"{k} = {v}" for k, v in report.config_echo]
    return "\n".join(lines) + "\n"


def report_from_flat(text: str, alpha: float = 0.05) -> BenchReport:
    """Rebuild a report (aggregates, deltas, tests) from a flat scores table.

    Every rendered aggregate is derived from per-frame rows, which is also how
    the no-hidden-state property is checked.
    """
    from .bench import (MetricRecord, SequenceScore, present_metrics,
                        sequence_aggregates, _stat_block)
    from .taxonomy import parse_texture_class

    per_clip: dict[tuple[str, str], dict] = {}
    version_order: list[str] = []
    for row in csv.DictReader(io.StringIO(text)):
        key = (row["version"], row["clip_id"])
        if row["version"] not in version_order:
            version_order.append(row["version"])
        slot = per_clip.setdefault(key, {
            "label": parse_texture_class(row["label"]) if row["label"] else None,
            "predicted": (parse_texture_class(row["predicted"])
                          if row["predicted"] else None),
            "routed": row["routed_profile"] or None,
            "vmaf": float(row["clip_vmaf"]) if row.get("clip_vmaf") else None,
            "records": [],
        })
        slot["records"].append(MetricRecord(
            clip_id=row["clip_id"], frame_index=int(row["frame_index"]),
            psnr=float(row["psnr"]), ssim=float(row["ssim"]),
            capped=row["capped"] == "1"))

    scores: dict[str, tuple] = {v: () for v in version_order}
    for (version, clip_id), slot in per_clip.items():
        recs = tuple(slot["records"])
        score = SequenceScore(
            clip_id=clip_id, label=slot["label"], predicted=slot["predicted"],
            records=recs,
            mean_psnr=float(np.mean([r.psnr for r in recs])),
            mean_ssim=float(np.mean([r.ssim for r in recs])),
            vmaf=slot["vmaf"], routed_profile=slot["routed"])
        scores[version] = scores[version] + (score,)

    metrics = present_metrics(scores)
    aggregates = sequence_aggregates(scores, metrics)
    deltas = {}
    for (version, group, metric), value in aggregates.items():
        base = aggregates.get(("baseline", group, metric))
        if version != "baseline" and base is not None:
            deltas[(version, group, metric)] = value - base
    stat_tests = {(v, m): _stat_block(scores[v], m)
                  for v in version_order for m in metrics}
    return BenchReport(versions=tuple(version_order), metrics=metrics,
                       scores=scores, aggregates=aggregates, deltas=deltas,
                       stat_tests=stat_tests, config_echo=(), alpha=alpha)


def emit_report(report: BenchReport, out_dir) -> dict[str, str]:
    """Write all report files; returns a name -> path mapping."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        paths = {}
        for name, text in (
            (FLAT_SCORES_NAME, render_flat_scores(report)),
            (COMPARISON_NAME, render_comparison(report)),
            (STATS_NAME, render_stats(report)),
            (DISTRIBUTIONS_NAME, render_distributions(report)),
            (CONFIG_ECHO_NAME, render_config_echo(report)),
        ):
            path = os.path.join(out_dir, name)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
            paths[name] = path
        return paths
    except OSError as exc:
        raise WriteFailed(f"could not write report to {out_dir}: {exc}") from exc
