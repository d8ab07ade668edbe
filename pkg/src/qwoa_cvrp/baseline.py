"""Classical random-sampling baseline and convergence-rate analysis.

The classical competitor to a depth-r ansatz is the best of 2r uniform
random draws from the solution space (the same number of quality-function
calls).  Its expectation is computed exactly from the quality histogram
via tail probabilities; a seeded Monte Carlo estimator is kept alongside
for methodological parity.  Convergence curves are summarised by the
fitted exponent alpha of gap(r) ~ r^-alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cvrp import QualityTable
from .errors import ValidationError

_MC_CHUNK = 10_000_000


def expected_best_of(table: QualityTable, samples: int) -> float:
    """Exact expectation of the minimum of ``samples`` uniform draws.

    With T_k the number of solutions of quality >= v_k,

        E[min] = sum_k v_k ((T_k / M)^s - (T_{k+1} / M)^s).
    """
    if samples < 1:
        raise ValidationError("sample count must be at least 1")
    m_size = table.size
    tail = np.concatenate(
        [np.cumsum(table.multiplicities[::-1])[::-1], [0]]
    ) / m_size
    weights = tail[:-1] ** samples - tail[1:] ** samples
    return float(weights @ table.distinct_values)


def monte_carlo_best_of(
    table: QualityTable, samples: int, trials: int, seed: int
) -> tuple[float, float]:
    """Seeded Monte Carlo estimate of :func:`expected_best_of` with its standard error."""
    if samples < 1 or trials < 1:
        raise ValidationError("samples and trials must both be at least 1")
    rng = np.random.default_rng(seed)
    mins = np.empty(trials)
    step = max(1, _MC_CHUNK // samples)
    for lo in range(0, trials, step):
        hi = min(lo + step, trials)
        draws = rng.integers(0, table.size, size=(hi - lo, samples))
        mins[lo:hi] = table.qualities[draws].min(axis=1)
    estimate = float(mins.mean())
    stderr = float(mins.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return estimate, stderr


@dataclass(frozen=True)
class ConvergenceRecord:
    """One row of the ansatz-vs-classical comparison at depth r."""

    r: int
    qwoa_expectation: float
    classical_expected_best: float
    target: float


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of log(value - target) against log r."""

    curve: str
    alpha: float
    r_min: int
    r_max: int
    residual: float


_COLUMNS = {
    "qwoa": lambda rec: rec.qwoa_expectation,
    "classical": lambda rec: rec.classical_expected_best,
}


def fit_power_law(
    records: Sequence[ConvergenceRecord],
    column: str,
    r_min: int | None = None,
    r_max: int | None = None,
) -> PowerLawFit:
    """Fit gap(r) ~ r^-alpha for one column; alpha is positive for decaying curves.

    Records with non-positive gap make the log fit meaningless and raise
    instead of being dropped.
    """
    if column not in _COLUMNS:
        raise ValidationError(f"column must be one of {sorted(_COLUMNS)}, got {column!r}")
    picked = [
        rec
        for rec in records
        if (r_min is None or rec.r >= r_min) and (r_max is None or rec.r <= r_max)
    ]
    if len(picked) < 3:
        raise ValidationError("power-law fit needs at least 3 records in range")
    value = _COLUMNS[column]
    gaps = [value(rec) - rec.target for rec in picked]
    bad = [rec.r for rec, gap in zip(picked, gaps) if gap <= 0]
    if bad:
        raise ValidationError(
            f"non-positive gap at r={bad}; the {column} curve already hit the target"
        )
    log_r = np.log([rec.r for rec in picked])
    log_gap = np.log(gaps)
    slope, intercept = np.polyfit(log_r, log_gap, 1)
    fitted = slope * log_r + intercept
    residual = float(np.sqrt(np.mean((fitted - log_gap) ** 2)))
    return PowerLawFit(
        curve=column,
        alpha=float(-slope),
        r_min=min(rec.r for rec in picked),
        r_max=max(rec.r for rec in picked),
        residual=residual,
    )


def compare(table: QualityTable, runs) -> list[ConvergenceRecord]:
    """Pair each depth-r optimisation result with the exact best-of-2r baseline.

    ``runs`` is a sequence of optimisation runs sorted by ascending depth;
    equivalent effort is 2r quality calls per depth r.
    """
    depths = [run.depth for run in runs]
    if depths != sorted(depths):
        raise ValidationError("runs must be sorted by ascending depth")
    target = table.min_quality
    return [
        ConvergenceRecord(
            r=run.depth,
            qwoa_expectation=run.best_objective,
            classical_expected_best=expected_best_of(table, 2 * run.depth),
            target=target,
        )
        for run in runs
    ]
