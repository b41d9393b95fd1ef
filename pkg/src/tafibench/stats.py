"""One-way ANOVA and Welch's t-test with exact p-values.

p-values come from the regularized incomplete beta function evaluated by
modified-Lentz continued fractions; no statistics library is involved, so
the test suite can check this module against an independent reference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    DomainError,
    InsufficientGroups,
    InsufficientSamples,
    ZeroVariance,
    ZeroWithinVariance,
)


@dataclass(frozen=True)
class AnovaResult:
    f_stat: float
    df_between: int
    df_within: int
    p_value: float


@dataclass(frozen=True)
class TTestResult:
    t_stat: float
    df: float          # Welch-Satterthwaite, fractional
    p_value: float     # two-sided


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b), absolute error below 1e-10."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must be in [0, 1], got {x}")
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"a and b must be positive, got a={a} b={b}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    # continued fraction converges fast for x below the switch point
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the standard continued fraction
    max_iter = 300
    eps = 1e-15
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise DomainError(f"incomplete beta did not converge for x={x} a={a} b={b}")


def _mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs)


def _sample_var(xs: Sequence[float], mean: float) -> float:
    return math.fsum((v - mean) ** 2 for v in xs) / (len(xs) - 1)


def one_way_anova(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """Classic one-way fixed-effects ANOVA across >= 2 groups."""
    if len(groups) < 2:
        raise InsufficientGroups(f"need at least 2 groups, got {len(groups)}")
    for i, g in enumerate(groups):
        if len(g) < 2:
            raise InsufficientSamples(f"group {i} has {len(g)} samples, need >= 2")
    k = len(groups)
    n_total = sum(len(g) for g in groups)
    means = [_mean(g) for g in groups]
    grand = math.fsum(math.fsum(g) for g in groups) / n_total
    ss_between = math.fsum(len(g) * (m - grand) ** 2 for g, m in zip(groups, means))
    ss_within = math.fsum(math.fsum((v - m) ** 2 for v in g)
                          for g, m in zip(groups, means))
    df_between = k - 1
    df_within = n_total - k
    ms_within = ss_within / df_within
    if ms_within == 0.0:
        raise ZeroWithinVariance("all groups are internally constant")
    f_stat = (ss_between / df_between) / ms_within
    x = df_within / (df_within + df_between * f_stat)
    p = reg_inc_beta(x, df_within / 2.0, df_between / 2.0)
    return AnovaResult(f_stat=f_stat, df_between=df_between,
                       df_within=df_within, p_value=p)


def welch_t_test(x: Sequence[float], y: Sequence[float]) -> TTestResult:
    """Two-sided Welch t-test (unequal variances, Welch-Satterthwaite df)."""
    if len(x) < 2 or len(y) < 2:
        raise InsufficientSamples(f"need >= 2 samples per side, got "
                                  f"{len(x)} and {len(y)}")
    nx, ny = len(x), len(y)
    mx, my = _mean(x), _mean(y)
    vx, vy = _sample_var(x, mx), _sample_var(y, my)
    if vx == 0.0 and vy == 0.0:
        if mx == my:
            # degenerate but consistent: identical constants are "the same"
            return TTestResult(t_stat=0.0, df=float(nx + ny - 2), p_value=1.0)
        raise ZeroVariance("both samples are constant with different means")
    ax, ay = vx / nx, vy / ny
    se2 = ax + ay
    t = (mx - my) / math.sqrt(se2)
    df = se2 * se2 / (ax * ax / (nx - 1) + ay * ay / (ny - 1))
    p = reg_inc_beta(df / (df + t * t), df / 2.0, 0.5)
    return TTestResult(t_stat=t, df=df, p_value=p)
