"""Statevector simulation of the alternating phase/walk ansatz.

The simulation lives in the M-dimensional space of valid solution indices
rather than the 2^m qubit space: the ansatz starts from the equal
superposition and both unitaries preserve the valid-solution span, so
infeasible basis states never acquire amplitude.  The walk over the
complete graph has the closed form

    exp(-i t L) = I + (exp(i M t) - 1) |s><s|      (up to a global phase)

with L = M (I - |s><s|), which turns each walk step into a rank-one
update costing O(M).

States are plain complex128 arrays.  Operations check that the result
stays normalised to within ``NORM_TOL`` and raise rather than silently
renormalising; all observable quantities are invariant under the dropped
global phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cvrp import QualityTable
from .errors import NormalizationError, ValidationError

NORM_TOL = 1e-12


@dataclass(frozen=True)
class VariationalParams:
    """Depth-r phase angles and walk times driving the ansatz."""

    gammas: tuple[float, ...]
    times: tuple[float, ...]

    def __post_init__(self):
        if len(self.gammas) != len(self.times):
            raise ValidationError(
                f"got {len(self.gammas)} phase angles but {len(self.times)} walk times"
            )
        if any(t < 0 for t in self.times):
            raise ValidationError("walk times must be non-negative")

    @property
    def depth(self) -> int:
        return len(self.gammas)

    @classmethod
    def from_arrays(cls, gammas, times) -> "VariationalParams":
        return cls(tuple(float(g) for g in gammas), tuple(float(t) for t in times))


def _norm_squared(state: np.ndarray) -> float:
    # Pairwise summation: sequential (BLAS-style) accumulation over ~4e5
    # terms already carries rounding error of the order of the tolerance.
    return float(np.sum(state.real**2 + state.imag**2))


def _check_norm(state: np.ndarray) -> np.ndarray:
    norm_sq = _norm_squared(state)
    if abs(norm_sq - 1.0) > NORM_TOL:
        raise NormalizationError(
            f"state norm squared drifted to {norm_sq!r} (tolerance {NORM_TOL})"
        )
    return state


def _check_lengths(state: np.ndarray, table: QualityTable) -> None:
    if state.shape != (table.size,):
        raise ValidationError(
            f"state has {state.shape[0]} amplitudes, table has {table.size} entries"
        )


def initial_state(m_size: int) -> np.ndarray:
    """Equal superposition over m_size solution indices.

    The amplitude is renormalised once at construction: for large M the
    rounding of M * (1/sqrt(M))^2 alone would already exhaust the norm
    tolerance.
    """
    if m_size < 1:
        raise ValidationError("state dimension must be at least 1")
    state = np.full(m_size, 1.0 / math.sqrt(m_size), dtype=complex)
    return _check_norm(state / math.sqrt(_norm_squared(state)))


def apply_phase(state: np.ndarray, table: QualityTable, gamma: float) -> np.ndarray:
    """Quality-dependent phase shift: a_i <- a_i * exp(-i gamma f(i)).

    Only one exponential per distinct quality is evaluated; the result is
    scattered through the table's inverse index.
    """
    _check_lengths(state, table)
    phases = np.exp(-1j * gamma * table.distinct_values)[table.inverse]
    return _check_norm(state * phases)


def apply_walk(state: np.ndarray, t: float) -> np.ndarray:
    """Continuous-time walk over the complete graph for time t (O(M)).

    The phase angle M*t is reduced modulo 2*pi first, so t = 2*pi/M is an
    exact identity; negative t is allowed (it is the inverse walk).
    """
    m_size = state.shape[0]
    phase = np.exp(1j * math.fmod(m_size * t, 2.0 * math.pi))
    mu = np.mean(state)
    return _check_norm(state + (phase - 1.0) * mu)


def _evolve_raw(table: QualityTable, gammas, times) -> np.ndarray:
    state = initial_state(table.size)
    for gamma, t in zip(gammas, times):
        state = apply_walk(apply_phase(state, table, gamma), t)
    return state


def evolve(table: QualityTable, params: VariationalParams) -> np.ndarray:
    """Run the depth-r ansatz from the equal superposition.

    Layer j applies the phase shift with angle gammas[j] and then walks for
    times[j]; depth 0 returns the equal superposition itself.
    """
    return _evolve_raw(table, params.gammas, params.times)


def expectation(state: np.ndarray, table: QualityTable) -> float:
    """Expected quality of a measurement, sum_i |a_i|^2 f(i)."""
    _check_lengths(state, table)
    probs = state.real**2 + state.imag**2
    return float(probs @ table.qualities)


def quality_distribution(
    state: np.ndarray, table: QualityTable
) -> list[tuple[float, float]]:
    """Measurement probability per distinct quality, sorted by quality."""
    _check_lengths(state, table)
    probs = state.real**2 + state.imag**2
    grouped = np.bincount(
        table.inverse, weights=probs, minlength=table.distinct_values.size
    )
    return [(float(v), float(p)) for v, p in zip(table.distinct_values, grouped)]


def amplification(state: np.ndarray) -> np.ndarray:
    """Per-node probability amplification |a_i|^2 / (1/M)."""
    probs = state.real**2 + state.imag**2
    return probs * state.shape[0]
