"""CVRP instances, the route cost function, and solution-space quality tables.

An instance is a depot plus n delivery locations: ``capacity`` is the
vehicle capacity, ``packages[i-1]`` the demand at location i, and
``costs[i][j]`` the travel cost from node i to node j with node 0 the
depot.  The cost of a solution partition is accumulated route by route:
the vehicle leaves the depot full, delivers along the route, shuttles back
for restocks whenever stock runs short, and returns to the depot at the
end of each route.  Exact depletion (stock hits zero with no remainder)
forces a depot return before the next location.
"""

from __future__ import annotations

import dataclasses
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ResourceLimitError, ValidationError
from .partitions import (
    Partition,
    canonicalize,
    cardinality,
    enumerate_partitions,
    unindex,
)

DEFAULT_SIZE_CAP = 10_000_000


@dataclass(frozen=True)
class CvrpInstance:
    """One problem instance: capacity, demands, and the (n+1)x(n+1) cost matrix."""

    capacity: int
    packages: tuple[int, ...]
    costs: tuple[tuple[float, ...], ...]

    @property
    def n(self) -> int:
        return len(self.packages)


def validate(inst: CvrpInstance) -> str | None:
    """Check all instance invariants; return the first violation, or None."""
    n = inst.n
    if n < 1:
        return "instance must have at least one delivery location"
    if inst.capacity < 1:
        return f"vehicle capacity must be a positive integer, got {inst.capacity}"
    for i, p in enumerate(inst.packages, start=1):
        if p < 0:
            return f"package count at location {i} is negative ({p})"
    if len(inst.costs) != n + 1 or any(len(row) != n + 1 for row in inst.costs):
        return f"cost matrix must be {n + 1}x{n + 1}"
    for i in range(n + 1):
        for j in range(n + 1):
            c = inst.costs[i][j]
            if i == j:
                if c != 0:
                    return f"cost matrix diagonal entry C[{i}][{i}] must be zero, got {c}"
            elif not (0 < c < float("inf")):
                return f"cost C[{i}][{j}] must be strictly positive and finite, got {c}"
    return None


def require_valid(inst: CvrpInstance) -> CvrpInstance:
    violation = validate(inst)
    if violation is not None:
        raise ValidationError(violation)
    return inst


def cost(inst: CvrpInstance, partition: Iterable[Sequence[int]]) -> float:
    """Total delivery cost of a solution partition for this instance.

    Subset order does not affect the result; the partition is validated and
    canonicalized first.
    """
    parts = canonicalize(partition)
    n = sum(len(s) for s in parts)
    if n != inst.n:
        raise ValidationError(f"partition covers {n} locations, instance has {inst.n}")
    packages = (0,) + inst.packages
    return _partition_cost(parts, inst.capacity, packages, inst.costs)


def _partition_cost(parts, capacity, packages, costs) -> float:
    total = 0.0
    for route in parts:
        total += _route_cost(route, capacity, packages, costs)
    return total


def _route_cost(route, capacity, packages, costs) -> float:
    # stock is the load remaining on the vehicle; a route always starts at
    # the depot with a full load.
    total = 0.0
    stock = capacity
    home = True
    last = len(route) - 1
    for pos, i in enumerate(route):
        demand = packages[i]
        if home:
            total += costs[0][i]
        if pos == last:
            restocks = 0 if stock > demand else (demand - stock - 1) // capacity + 1
            total += restocks * costs[0][i] + (restocks + 1) * costs[i][0]
        else:
            if stock > demand:
                stock -= demand
                restocks = 0
                home = False
            else:
                short = demand - stock
                if short % capacity == 0:
                    # Exact depletion: finish empty, so return to the depot
                    # and approach the next location from there.
                    restocks = short // capacity
                    home = True
                    stock = capacity
                else:
                    restocks = short // capacity + 1
                    home = False
                    stock = capacity - short % capacity
            total += restocks * (costs[0][i] + costs[i][0])
            total += costs[i][0] if home else costs[i][route[pos + 1]]
    return total


@dataclass(frozen=True)
class QualityTable:
    """Cost of every solution, indexed by solution index.

    ``distinct_values`` and ``multiplicities`` describe the quality
    histogram; ``inverse[i]`` maps solution i to its slot in
    ``distinct_values`` (used to batch per-quality work).
    """

    instance: CvrpInstance | None
    qualities: np.ndarray
    distinct_values: np.ndarray
    multiplicities: np.ndarray
    inverse: np.ndarray

    @classmethod
    def from_qualities(cls, qualities, instance: CvrpInstance | None = None) -> "QualityTable":
        values = np.asarray(qualities, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValidationError("quality table must be a non-empty 1-d array")
        distinct, inverse, counts = np.unique(
            values, return_inverse=True, return_counts=True
        )
        return cls(instance, values, distinct, counts, inverse.astype(np.intp))

    @property
    def size(self) -> int:
        return int(self.qualities.size)

    @property
    def min_quality(self) -> float:
        return float(self.distinct_values[0])

    @property
    def mean_quality(self) -> float:
        return float(np.mean(self.qualities))

    def distinct_histogram(self) -> list[tuple[float, int]]:
        """Sorted (quality value, multiplicity) pairs."""
        return [
            (float(v), int(c))
            for v, c in zip(self.distinct_values, self.multiplicities)
        ]


def build_quality_table(
    inst: CvrpInstance,
    size_cap: int = DEFAULT_SIZE_CAP,
    workers: int = 1,
) -> QualityTable:
    """Evaluate the cost of every solution, in index order.

    Raises :class:`ResourceLimitError` when the solution space exceeds
    ``size_cap``.  With ``workers > 1`` the scan is split over processes;
    the stored order is by index either way.
    """
    require_valid(inst)
    m_size = cardinality(inst.n)
    if m_size > size_cap:
        raise ResourceLimitError(
            f"solution space has {m_size} entries, above the cap of {size_cap}"
        )
    if workers > 1:
        values = _scan_parallel(inst, m_size, workers)
    else:
        packages = (0,) + inst.packages
        capacity, costs = inst.capacity, inst.costs
        values = np.fromiter(
            (
                _partition_cost(parts, capacity, packages, costs)
                for parts in enumerate_partitions(inst.n)
            ),
            dtype=float,
            count=m_size,
        )
    return QualityTable.from_qualities(values, instance=inst)


def _scan_chunk(args) -> np.ndarray:
    inst, lo, hi = args
    packages = (0,) + inst.packages
    capacity, costs = inst.capacity, inst.costs
    return np.fromiter(
        (
            _partition_cost(unindex(inst.n, i), capacity, packages, costs)
            for i in range(lo, hi)
        ),
        dtype=float,
        count=hi - lo,
    )


def _scan_parallel(inst: CvrpInstance, m_size: int, workers: int) -> np.ndarray:
    chunk = -(-m_size // workers)
    bounds = [(inst, lo, min(lo + chunk, m_size)) for lo in range(0, m_size, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pieces = list(pool.map(_scan_chunk, bounds))
    return np.concatenate(pieces)


def brute_force_optimum(
    inst: CvrpInstance,
    size_cap: int = DEFAULT_SIZE_CAP,
    table: QualityTable | None = None,
) -> tuple[float, list[int]]:
    """Global minimum quality and every solution index attaining it."""
    if table is None:
        table = build_quality_table(inst, size_cap=size_cap)
    best = table.min_quality
    argmin = [int(i) for i in np.flatnonzero(table.qualities == best)]
    return best, argmin


@dataclass(frozen=True)
class GenerationConfig:
    """Ranges for random instance generation (defaults: the reference setup)."""

    inter_cost: tuple[int, int] = (1, 15)
    depot_cost: tuple[int, int] = (10, 20)
    packages: tuple[int, int] = (5, 30)
    capacity: int = 20
    symmetric: bool = True

    def check(self) -> None:
        for name, (lo, hi) in (
            ("inter_cost", self.inter_cost),
            ("depot_cost", self.depot_cost),
            ("packages", self.packages),
        ):
            if lo > hi:
                raise ValidationError(f"{name} range has min {lo} > max {hi}")
        if self.inter_cost[0] < 1 or self.depot_cost[0] < 1:
            raise ValidationError("cost ranges must be strictly positive")
        if self.packages[0] < 0:
            raise ValidationError("package range must be non-negative")
        if self.capacity < 1:
            raise ValidationError("capacity must be a positive integer")


def generate_random_instance(
    n: int,
    seed: int,
    config: GenerationConfig = GenerationConfig(),
) -> CvrpInstance:
    """Seeded random instance with integer costs and demands in the configured ranges."""
    if n < 1:
        raise ValidationError("problem size n must be at least 1")
    config.check()
    rng = random.Random(seed)
    packages = tuple(rng.randint(*config.packages) for _ in range(n))
    costs = [[0.0] * (n + 1) for _ in range(n + 1)]
    for j in range(1, n + 1):
        costs[0][j] = float(rng.randint(*config.depot_cost))
        costs[j][0] = costs[0][j] if config.symmetric else float(rng.randint(*config.depot_cost))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            costs[i][j] = float(rng.randint(*config.inter_cost))
            costs[j][i] = costs[i][j] if config.symmetric else float(rng.randint(*config.inter_cost))
    inst = CvrpInstance(
        capacity=config.capacity,
        packages=packages,
        costs=tuple(tuple(row) for row in costs),
    )
    return require_valid(inst)


def example_instance_3() -> CvrpInstance:
    """The worked 3-location instance used in the documentation and tests."""
    return CvrpInstance(
        capacity=20,
        packages=(14, 24, 8),
        costs=(
            (0.0, 16.0, 19.0, 12.0),
            (16.0, 0.0, 12.0, 17.0),
            (19.0, 12.0, 0.0, 10.0),
            (12.0, 17.0, 10.0, 0.0),
        ),
    )


def reference_instance_8() -> CvrpInstance:
    """The randomly generated 8-location reference instance."""
    return CvrpInstance(
        capacity=20,
        packages=(23, 18, 28, 7, 23, 27, 9, 22),
        costs=(
            (0.0, 10.0, 16.0, 10.0, 14.0, 17.0, 12.0, 11.0, 17.0),
            (10.0, 0.0, 7.0, 8.0, 14.0, 9.0, 4.0, 1.0, 5.0),
            (16.0, 7.0, 0.0, 15.0, 10.0, 10.0, 5.0, 2.0, 11.0),
            (10.0, 8.0, 15.0, 0.0, 5.0, 15.0, 13.0, 15.0, 15.0),
            (14.0, 14.0, 10.0, 5.0, 0.0, 1.0, 4.0, 15.0, 4.0),
            (17.0, 9.0, 10.0, 15.0, 1.0, 0.0, 13.0, 5.0, 3.0),
            (12.0, 4.0, 5.0, 13.0, 4.0, 13.0, 0.0, 2.0, 7.0),
            (11.0, 1.0, 2.0, 15.0, 15.0, 5.0, 2.0, 0.0, 2.0),
            (17.0, 5.0, 11.0, 15.0, 4.0, 3.0, 7.0, 2.0, 0.0),
        ),
    )


def instance_to_dict(inst: CvrpInstance) -> dict:
    return {
        "n": inst.n,
        "capacity": inst.capacity,
        "packages": list(inst.packages),
        "costs": [
            [int(c) if float(c).is_integer() else float(c) for c in row]
            for row in inst.costs
        ],
    }


def instance_from_dict(data: dict) -> CvrpInstance:
    try:
        n = int(data["n"])
        inst = CvrpInstance(
            capacity=int(data["capacity"]),
            packages=tuple(int(p) for p in data["packages"]),
            costs=tuple(tuple(float(c) for c in row) for row in data["costs"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed instance data: {exc}") from exc
    if inst.n != n:
        raise ValidationError(
            f"instance declares n={n} but has {inst.n} package entries"
        )
    return require_valid(inst)


def save_instance(inst: CvrpInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=1) + "\n")


def load_instance(path: str | Path) -> CvrpInstance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid instance JSON: {exc}") from exc
    return instance_from_dict(data)
