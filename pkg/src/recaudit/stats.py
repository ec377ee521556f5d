"""Audit statistics: Pearson chi-square, relative risk, and BH-FDR control.

The chi-square p-value is computed from a from-scratch regularized incomplete
gamma function (series expansion below the a+1 knee, Lentz continued fraction
above it) so the engine has no runtime dependency beyond numpy. Relative-risk
confidence intervals use the Katz log method. All operations are pure.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from recaudit.errors import DegenerateTableError, ZeroCellError

Z_95 = 1.96
EXPECTED_COUNT_FLOOR = 10.0
_GAMMA_EPS = 1e-15
_GAMMA_MAX_ITER = 10_000


@dataclass(frozen=True)
class ContingencyTable:
    """An r x c table of non-negative integer counts with axis labels."""

    counts: tuple[tuple[int, ...], ...]
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def __post_init__(self):
        arr = np.asarray(self.counts)
        if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
            raise ValueError("table must be at least 2x2")
        if (arr < 0).any():
            raise ValueError("counts must be non-negative")
        if arr.sum() < 1:
            raise ValueError("grand total must be >= 1")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.float64)


def table(counts: Sequence[Sequence[int]], row_labels=(), col_labels=()) -> ContingencyTable:
    return ContingencyTable(
        counts=tuple(tuple(int(c) for c in row) for row in counts),
        row_labels=tuple(row_labels),
        col_labels=tuple(col_labels),
    )


@dataclass(frozen=True)
class TestResult:
    chi2: float
    df: int
    p: float
    expected_min: float
    low_expected_warning: bool


@dataclass(frozen=True)
class EffectSize:
    """Relative risk with a 95% confidence interval (Katz log method)."""

    rr: float
    ci_low: float
    ci_high: float
    alpha: float = 0.05
    corrected: bool = False

    def __post_init__(self):
        if not (self.ci_low <= self.rr <= self.ci_high):
            raise ValueError("confidence interval must contain the point estimate")


def _lower_gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by series, for x < a + 1."""
    term = 1.0 / a
    total = term
    for n in range(1, _GAMMA_MAX_ITER):
        term *= x / (a + n)
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _upper_gamma_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by continued fraction (Lentz)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, _GAMMA_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammainc_upper(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) for a > 0, x >= 0."""
    if a <= 0:
        raise ValueError("shape parameter a must be > 0")
    if x < 0 or not math.isfinite(x):
        raise ValueError("x must be finite and >= 0")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _lower_gamma_series(a, x)
    return _upper_gamma_cf(a, x)


def chi2_survival(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution, Q(df/2, x/2)."""
    if not math.isfinite(x) or x < 0:
        raise ValueError("chi-square statistic must be finite and >= 0")
    if df < 1:
        raise ValueError("df must be >= 1")
    return gammainc_upper(df / 2.0, x / 2.0)


def expected_counts(observed: np.ndarray) -> np.ndarray:
    row = observed.sum(axis=1, keepdims=True)
    col = observed.sum(axis=0, keepdims=True)
    return row @ col / observed.sum()


def chi_square(tab: ContingencyTable, yates: bool = False) -> TestResult:
    """Pearson chi-square test of independence.

    No continuity correction by default; pass ``yates=True`` for a 2x2
    sensitivity analysis. Zero marginal rows or columns are rejected.
    """
    observed = tab.as_array()
    if (observed.sum(axis=1) == 0).any() or (observed.sum(axis=0) == 0).any():
        raise DegenerateTableError("table has a zero marginal row or column")
    expected = expected_counts(observed)
    diff = np.abs(observed - expected)
    if yates:
        diff = np.maximum(diff - 0.5, 0.0)
    stat = float((diff**2 / expected).sum())
    df = (observed.shape[0] - 1) * (observed.shape[1] - 1)
    expected_min = float(expected.min())
    return TestResult(
        chi2=stat,
        df=df,
        p=chi2_survival(stat, df),
        expected_min=expected_min,
        low_expected_warning=expected_min < EXPECTED_COUNT_FLOOR,
    )


def relative_risk(a: int, n1: int, b: int, n2: int, haldane: bool = False) -> EffectSize:
    """Relative risk of the exposed group (a/n1) versus control (b/n2).

    The 95% CI is exp(ln rr +/- 1.96 * sqrt(1/a - 1/n1 + 1/b - 1/n2)). A zero
    event cell raises ZeroCellError unless ``haldane=True``, which adds 0.5 to
    every cell of the underlying 2x2 table and flags the estimate.
    """
    if a > n1 or b > n2:
        raise ValueError("event counts cannot exceed group sizes")
    if min(a, n1, b, n2) < 0:
        raise ValueError("counts must be non-negative")
    corrected = False
    if a == 0 or b == 0:
        if not haldane:
            raise ZeroCellError(
                "zero cell in 2x2 table; rerun with haldane=True for a "
                "continuity-corrected (0.5 added to all cells) estimate"
            )
        # Haldane-Anscombe: 0.5 per cell, so each group total grows by 1.
        af, n1f, bf, n2f = a + 0.5, n1 + 1.0, b + 0.5, n2 + 1.0
        corrected = True
    else:
        af, n1f, bf, n2f = float(a), float(n1), float(b), float(n2)

    rr = (af / n1f) / (bf / n2f)
    se = math.sqrt(1.0 / af - 1.0 / n1f + 1.0 / bf - 1.0 / n2f)
    log_rr = math.log(rr)
    return EffectSize(
        rr=rr,
        ci_low=math.exp(log_rr - Z_95 * se),
        ci_high=math.exp(log_rr + Z_95 * se),
        corrected=corrected,
    )


def bh_adjust(p_values: Sequence[float]) -> np.ndarray:
    """Benjamini-Hochberg step-up adjusted p-values, original order preserved."""
    ps = np.asarray(p_values, dtype=np.float64)
    if ps.size == 0:
        return ps.copy()
    if ((ps < 0) | (ps > 1)).any() or not np.isfinite(ps).all():
        raise ValueError("p-values must lie in [0, 1]")
    m = ps.size
    order = np.argsort(ps, kind="stable")
    ranked = ps[order] * m / np.arange(1, m + 1)
    # Step-up: running minimum from the largest rank down, capped at 1.
    adjusted_sorted = np.minimum(1.0, np.minimum.accumulate(ranked[::-1])[::-1])
    adjusted = np.empty(m)
    adjusted[order] = adjusted_sorted
    return adjusted


@dataclass(frozen=True)
class PairwiseResult:
    pair: tuple[str, str]
    test: TestResult
    p_adjusted: float
    significant: bool


def group_table(groups: Mapping[str, tuple[int, int]]) -> ContingencyTable:
    """Build a (groups x {NH, H}) table from per-group (NH, H) counts."""
    labels = list(groups)
    return table(
        [[groups[g][0], groups[g][1]] for g in labels],
        row_labels=labels,
        col_labels=("non_hateful", "hateful"),
    )


def pairwise_posthoc(
    groups: Mapping[str, tuple[int, int]], alpha: float = 0.05
) -> list[PairwiseResult]:
    """2x2 chi-square for every unordered pair of groups, BH-adjusted jointly."""
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    pairs = list(combinations(sorted(groups), 2))
    tests = [
        chi_square(table([list(groups[g1]), list(groups[g2])], row_labels=(g1, g2)))
        for g1, g2 in pairs
    ]
    adjusted = bh_adjust([t.p for t in tests])
    return [
        PairwiseResult(pair=pair, test=test, p_adjusted=float(adj), significant=bool(adj < alpha))
        for pair, test, adj in zip(pairs, tests, adjusted)
    ]


def load_table_csv(path: str | Path) -> ContingencyTable:
    """Read a contingency table from CSV: header = column labels, first cell blank."""
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3:
        raise ValueError("CSV table needs a header and at least two data rows")
    col_labels = tuple(rows[0][1:])
    row_labels = tuple(r[0] for r in rows[1:])
    counts = [[int(c) for c in r[1:]] for r in rows[1:]]
    return table(counts, row_labels=row_labels, col_labels=col_labels)


def format_test(result: TestResult) -> str:
    note = " (warning: expected count < 10)" if result.low_expected_warning else ""
    return f"chi2({result.df}) = {result.chi2:.2f}, p = {result.p:.4g}{note}"


def format_effect(effect: EffectSize) -> str:
    note = " (Haldane-Anscombe corrected)" if effect.corrected else ""
    return f"RR {effect.rr:.2f} [{effect.ci_low:.2f}, {effect.ci_high:.2f}]{note}"


__all__ = [
    "ContingencyTable",
    "EffectSize",
    "PairwiseResult",
    "TestResult",
    "bh_adjust",
    "chi2_survival",
    "chi_square",
    "expected_counts",
    "format_effect",
    "format_test",
    "gammainc_upper",
    "group_table",
    "load_table_csv",
    "pairwise_posthoc",
    "relative_risk",
    "table",
]
