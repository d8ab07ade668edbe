"""Classical variational loop tuning the phase/walk parameters.

Each depth is minimised with quasi-Newton (BFGS) descent driven by
central finite-difference gradients, from a deterministic set of starts:
the best depth-(r-1) parameters extended with a zero layer, plus seeded
random draws.  The zero-extended start guarantees the best objective is
non-increasing in depth and never exceeds the mean quality (the depth-0
value).

Internally the walk times are rescaled to angles u = M * t, so every
coordinate lives on a 2*pi-periodic axis of comparable sensitivity; the
reported parameters are always plain (gamma, t) pairs with t reduced into
[0, 2*pi/M).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .cvrp import QualityTable
from .errors import ValidationError
from .qwoa import VariationalParams, _evolve_raw, expectation

DEFAULT_RESTARTS = 10
DEFAULT_BUDGET = 5000
DEFAULT_GRADIENT_STEP = 1e-6


class _BudgetExhausted(Exception):
    """Internal: the per-depth objective-evaluation budget ran out."""


def objective(table: QualityTable, params: VariationalParams) -> float:
    """Expected quality of the depth-r ansatz state for these parameters."""
    return expectation(_evolve_raw(table, params.gammas, params.times), table)


def gradient(
    table: QualityTable, params: VariationalParams, step: float = DEFAULT_GRADIENT_STEP
) -> np.ndarray:
    """Central-difference gradient, ordered [d/dgamma_1.., d/dt_1..] (length 2r)."""
    if step <= 0:
        raise ValidationError("finite-difference step must be positive")
    point = np.concatenate([params.gammas, params.times])
    depth = params.depth

    def value_at(vec: np.ndarray) -> float:
        return expectation(_evolve_raw(table, vec[:depth], vec[depth:]), table)

    grad = np.empty(2 * depth)
    for j in range(2 * depth):
        forward = point.copy()
        backward = point.copy()
        forward[j] += step
        backward[j] -= step
        grad[j] = (value_at(forward) - value_at(backward)) / (2.0 * step)
    return grad


@dataclass(frozen=True)
class OptimizationRun:
    """Outcome of one depth: winning start, tuned parameters, and bookkeeping."""

    depth: int
    initial_params: VariationalParams
    best_params: VariationalParams
    best_objective: float
    evaluations: int
    restarts: int
    restart_index: int
    budget_exhausted: bool


def optimize_at_depth(
    table: QualityTable,
    depth: int,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    warm_start: VariationalParams | None = None,
    gradient_step: float = DEFAULT_GRADIENT_STEP,
) -> OptimizationRun:
    """Minimise the depth-r objective from the warm start plus random restarts.

    The warm start is the best depth-(r-1) parameter vector extended with a
    zero layer (an exact identity, so its objective equals the previous
    best); with no warm start the all-zero vector stands in for depth 0.
    Random draws cycle through jittered interpolations of the warm
    schedule, random extensions of it, and fresh points (see
    ``_draw_starts``).  ``budget`` caps the total number of objective
    evaluations, counting the finite-difference ones; exhausting it skips
    remaining starts and is flagged on the result.
    """
    if depth < 1:
        raise ValidationError("optimisation depth must be at least 1")
    if warm_start is not None and warm_start.depth >= depth:
        raise ValidationError("warm start must come from a strictly smaller depth")
    m_size = table.size
    evaluations = 0
    seen: list = [math.inf, None]  # best (value, vector) of the current start

    def value_at(vec: np.ndarray) -> float:
        nonlocal evaluations
        if evaluations >= budget:
            raise _BudgetExhausted
        evaluations += 1
        state = _evolve_raw(table, vec[:depth], vec[depth:] / m_size)
        value = expectation(state, table)
        if value < seen[0]:
            seen[0], seen[1] = value, vec.copy()
        return value

    def grad_at(vec: np.ndarray) -> np.ndarray:
        out = np.empty(2 * depth)
        for j in range(2 * depth):
            forward = vec.copy()
            backward = vec.copy()
            forward[j] += gradient_step
            backward[j] -= gradient_step
            out[j] = (value_at(forward) - value_at(backward)) / (2.0 * gradient_step)
        return out

    # Appending a zero layer is an exact identity, so this candidate scores
    # exactly the depth-(r-1) best (or the mean quality when there is none);
    # keeping it in the pool makes the best objective non-increasing in depth.
    zero_extended = _zero_extend(depth, warm_start)
    evaluations += 1
    best_params = zero_extended
    best_value = objective(table, zero_extended)
    best_index = 0

    warm_vec = _warm_vector(depth, m_size, warm_start)
    warm_depth = warm_start.depth if warm_start is not None else 0
    rng = np.random.default_rng([seed, depth])
    starts = [warm_vec] + _draw_starts(rng, depth, restarts, warm_vec, warm_depth)

    budget_exhausted = False
    for start_index, start in enumerate(starts):
        if evaluations >= budget:
            budget_exhausted = True
            break
        seen[0], seen[1] = math.inf, None
        try:
            value_at(start)
            # ~(4r + 2) evaluations per BFGS iteration: one central-difference
            # gradient plus line-search probes.  Budget is rationed over the
            # remaining starts; whatever a start leaves unused rolls over.
            share = (budget - evaluations) // (len(starts) - start_index)
            max_iter = max(3, share // (4 * depth + 2))
            minimize(
                value_at,
                start,
                jac=grad_at,
                method="BFGS",
                options={"maxiter": max_iter, "gtol": 1e-8},
            )
        except _BudgetExhausted:
            budget_exhausted = True
        if seen[1] is not None and seen[0] < best_value:
            tuned = _params_from_vector(seen[1], depth, m_size)
            value = objective(table, tuned)
            evaluations += 1
            if value < best_value:
                best_params, best_value, best_index = tuned, value, start_index
        if budget_exhausted:
            break
    if evaluations >= budget:
        budget_exhausted = True

    initial = (
        zero_extended
        if best_index == 0
        else _params_from_vector(starts[best_index], depth, m_size)
    )
    return OptimizationRun(
        depth=depth,
        initial_params=initial,
        best_params=best_params,
        best_objective=best_value,
        evaluations=evaluations,
        restarts=restarts,
        restart_index=best_index,
        budget_exhausted=budget_exhausted,
    )


_GAMMA_LOG_SPAN = 4.0  # smallest drawn phase angle is 2*pi * 10**-span
_JITTER = (0.85, 1.15)


def _random_start(rng: np.random.Generator, depth: int) -> np.ndarray:
    # Walk angles u = M*t are drawn uniformly over the period.  Phase angles
    # are drawn log-uniformly over (0, 2*pi): for integer-valued quality
    # tables the objective is flat at the mean for all but small gamma
    # (coherence needs gamma * quality-range of order one), so uniform
    # draws would almost never start inside the informative region.
    gammas = 2.0 * math.pi * 10.0 ** rng.uniform(-_GAMMA_LOG_SPAN, 0.0, size=depth)
    angles = rng.uniform(0.0, 2.0 * math.pi, size=depth)
    return np.concatenate([gammas, angles])


def _interp_schedule(values: np.ndarray, new_len: int) -> np.ndarray:
    if values.size == 1:
        return np.full(new_len, values[0])
    grid_old = np.linspace(0.0, 1.0, values.size)
    grid_new = np.linspace(0.0, 1.0, new_len)
    return np.interp(grid_new, grid_old, values)


def _draw_starts(
    rng: np.random.Generator,
    depth: int,
    restarts: int,
    warm_vec: np.ndarray,
    warm_depth: int,
) -> list[np.ndarray]:
    # The zero-extended warm start is itself a stationary point (the new
    # layer's gradient vanishes there), so descent needs starts that break
    # the symmetry.  With a warm schedule available the draws cycle through
    # three kinds: the warm schedule interpolated onto the new depth with
    # multiplicative jitter, the warm layers with random appended ones, and
    # fully fresh draws.
    starts = []
    for draw in range(restarts):
        vec = _random_start(rng, depth)
        if warm_depth == 0:
            starts.append(vec)
            continue
        kind = draw % 3
        if kind == 0:
            jit_g = rng.uniform(*_JITTER, size=depth)
            jit_u = rng.uniform(*_JITTER, size=depth)
            vec = np.concatenate([
                _interp_schedule(warm_vec[:warm_depth], depth) * jit_g,
                _interp_schedule(warm_vec[depth : depth + warm_depth], depth) * jit_u,
            ])
        elif kind == 1:
            vec[:warm_depth] = warm_vec[:warm_depth]
            vec[depth : depth + warm_depth] = warm_vec[depth : depth + warm_depth]
        starts.append(vec)
    return starts


def _zero_extend(depth: int, warm_start: VariationalParams | None) -> VariationalParams:
    prev_g = warm_start.gammas if warm_start is not None else ()
    prev_t = warm_start.times if warm_start is not None else ()
    pad = depth - len(prev_g)
    return VariationalParams(prev_g + (0.0,) * pad, prev_t + (0.0,) * pad)


def _warm_vector(
    depth: int, m_size: int, warm_start: VariationalParams | None
) -> np.ndarray:
    vec = np.zeros(2 * depth)
    if warm_start is not None:
        prev = warm_start.depth
        vec[:prev] = warm_start.gammas
        vec[depth : depth + prev] = np.asarray(warm_start.times) * m_size
    return vec


def _params_from_vector(vec: np.ndarray, depth: int, m_size: int) -> VariationalParams:
    # Walk times are exactly 2*pi/M periodic, so the scaled angles can be
    # folded into [0, 2*pi) before converting back to times.
    angles = np.mod(vec[depth:], 2.0 * math.pi)
    return VariationalParams.from_arrays(vec[:depth], angles / m_size)


def convergence_sweep(
    table: QualityTable,
    depths,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    gradient_step: float = DEFAULT_GRADIENT_STEP,
) -> list[OptimizationRun]:
    """Optimise each depth in turn, warm-starting from the previous best."""
    depths = list(depths)
    if depths != sorted(depths) or len(set(depths)) != len(depths):
        raise ValidationError("depths must be strictly ascending")
    runs: list[OptimizationRun] = []
    warm: VariationalParams | None = None
    for depth in depths:
        run = optimize_at_depth(
            table,
            depth,
            restarts=restarts,
            seed=seed,
            budget=budget,
            warm_start=warm,
            gradient_step=gradient_step,
        )
        runs.append(run)
        warm = run.best_params
    return runs
