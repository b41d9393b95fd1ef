"""Run configuration and the plain hierarchical key/value text format.

The format is intentionally boring: one ``dotted.key = value`` per line,
``#`` comments, blank lines ignored. The same syntax carries profile files.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import InvalidSpec


def parse_kv_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidSpec(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def format_kv(items: list[tuple[str, str]], header: str = "") -> str:
    lines = [f"# {header}"] if header else []
    lines.extend(f"{k} = {v}" for k, v in items)
    return "\n".join(lines) + "\n"


def _parse_bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


@dataclass(frozen=True)
class RunConfig:
    """Everything adjustable about a benchmark run, with desk-scale defaults."""

    # classifier thresholds (calibrated on the default synthetic corpus)
    classifier_static_residual_max: float = 2.0
    classifier_incoherence_split: float = 0.5

    # statistics
    alpha: float = 0.05

    # tuning schedule
    tuning_triplets_per_round: int = 200
    tuning_rounds: int = 10
    tuning_decay_rounds: int = 4
    tuning_patch: int = 96
    tuning_mixing: str = "proportional"       # or "balanced"

    # benchmark behavior
    bench_routing: str = "label"              # label | classifier | both
    bench_workers: int = 0                    # 0 = one per CPU
    bench_allow_overlap: bool = False         # permit tuning/test clip overlap

    # external VMAF tool (optional)
    vmaf_command: str = ""
    vmaf_score_key: str = "pooled_metrics.vmaf.mean"
    vmaf_version_key: str = "version"

    def __post_init__(self):
        if self.bench_routing not in ("label", "classifier", "both"):
            raise InvalidSpec(f"bench.routing must be label|classifier|both, "
                              f"got {self.bench_routing!r}")
        if self.tuning_mixing not in ("proportional", "balanced"):
            raise InvalidSpec(f"tuning.mixing must be proportional|balanced, "
                              f"got {self.tuning_mixing!r}")
        if not 0 < self.alpha < 1:
            raise InvalidSpec(f"alpha must be in (0, 1), got {self.alpha}")


# external dotted name -> (dataclass field, parser)
_KEY_MAP = {
    "classifier.static_residual_max": ("classifier_static_residual_max", float),
    "classifier.incoherence_split": ("classifier_incoherence_split", float),
    "stats.alpha": ("alpha", float),
    "tuning.triplets_per_round": ("tuning_triplets_per_round", int),
    "tuning.rounds": ("tuning_rounds", int),
    "tuning.decay_rounds": ("tuning_decay_rounds", int),
    "tuning.patch": ("tuning_patch", int),
    "tuning.mixing": ("tuning_mixing", str),
    "bench.routing": ("bench_routing", str),
    "bench.workers": ("bench_workers", int),
    "bench.allow_overlap": ("bench_allow_overlap", _parse_bool),
    "vmaf.command": ("vmaf_command", str),
    "vmaf.score_key": ("vmaf_score_key", str),
    "vmaf.version_key": ("vmaf_version_key", str),
}

_FIELD_TO_KEY = {field: key for key, (field, _) in _KEY_MAP.items()}


def config_from_text(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base if base is not None else RunConfig()
    overrides = {}
    for key, raw in parse_kv_text(text).items():
        if key not in _KEY_MAP:
            raise InvalidSpec(f"unknown config key {key!r}")
        field, parser = _KEY_MAP[key]
        try:
            overrides[field] = parser(raw)
        except ValueError as exc:
            raise InvalidSpec(f"bad value for {key}: {exc}") from exc
    return replace(cfg, **overrides)


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_text(fh.read(), base)


def config_to_text(cfg: RunConfig) -> str:
    items = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        rendered = repr(value) if isinstance(value, float) else str(value).lower() \
            if isinstance(value, bool) else str(value)
        items.append((_FIELD_TO_KEY[f.name], rendered))
    return format_kv(items, header="tafibench run configuration")
