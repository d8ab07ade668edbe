"""Ordered set partitions of {1..n}: counting, canonical form, and the
bijection between partitions and integer indices.

A delivery plan for n locations is a partition of {1, ..., n} into
non-empty, internally ordered subsets (one subset per route).  The number
of such partitions with k subsets is the unsigned Lah number L(n, k), and
the whole solution space has size M = sum_k L(n, k).  ``index`` and
``unindex`` realise an exact bijection between canonical partitions and
the integers [0, M), so a statevector over solutions can be addressed by
index alone.

Canonical form orders subsets by ascending minimum element.  Removing or
re-inserting the current largest element never changes any other subset's
minimum, so this order is stable under the recursion that drives the
bijection.  Insertion slots are counted left to right across the canonical
subsets: slot 0 is the front of the first subset, followed by the slot
after each element, then the front of the next subset, and so on.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import PartitionError, ValidationError

# A partition is a tuple of routes; each route is a tuple of location labels.
Partition = tuple[tuple[int, ...], ...]


def lah(n: int, k: int) -> int:
    """Unsigned Lah number L(n, k) by the closed form C(n-1, k-1) * n!/k!.

    Out-of-range arguments (k > n, k < 0, n < 0) return 0, matching the
    recursive definition; see :func:`lah_recursive` for the other route.
    """
    if n < 0 or k < 0 or k > n:
        return 0
    if n == k:
        return 1
    if k == 0:
        return 0
    return math.comb(n - 1, k - 1) * (math.factorial(n) // math.factorial(k))


@lru_cache(maxsize=None)
def lah_recursive(n: int, k: int) -> int:
    """L(n, k) by the recursion L(n,k) = L(n-1,k-1) + (n+k-1) L(n-1,k)."""
    if n == k:
        return 1
    if n <= 0 or k <= 0 or k > n:
        return 0
    return lah_recursive(n - 1, k - 1) + (n + k - 1) * lah_recursive(n - 1, k)


class LahTable:
    """Table of L(n, k) for 0 <= k <= n <= n_max, built by the recursion.

    Values are exact Python integers, so the table stays correct far past
    the 64-bit range (L(n) overflows machine words near n = 17).
    """

    def __init__(self, n_max: int):
        if n_max < 0:
            raise ValidationError("n_max must be non-negative")
        self.n_max = n_max
        rows: list[list[int]] = [[1]]
        for n in range(1, n_max + 1):
            prev = rows[n - 1]
            row = [0] * (n + 1)
            for k in range(1, n + 1):
                above = prev[k] if k <= n - 1 else 0
                row[k] = prev[k - 1] + (n + k - 1) * above
            rows.append(row)
        self.rows = rows

    def value(self, n: int, k: int) -> int:
        if n < 0 or n > self.n_max:
            raise ValidationError(f"n={n} outside table range 0..{self.n_max}")
        if k < 0 or k > n:
            return 0
        return self.rows[n][k]

    def row_sum(self, n: int) -> int:
        """Solution-space size L(n) = sum_k L(n, k)."""
        return sum(self.rows[n])


def cardinality(n: int) -> int:
    """Number of solutions M = L(n) for a problem with n locations."""
    if n < 1:
        raise ValidationError("problem size n must be at least 1")
    return sum(lah(n, k) for k in range(1, n + 1))


def canonicalize(subsets: Iterable[Sequence[int]]) -> Partition:
    """Validate a partition and sort its subsets by minimum element.

    Within-subset order is preserved; only the subset order changes.
    Raises :class:`PartitionError` for empty subsets, duplicate labels, or
    labels that do not cover exactly {1..n}.
    """
    parts = tuple(tuple(int(x) for x in s) for s in subsets)
    if not parts:
        raise PartitionError("partition has no subsets")
    seen: set[int] = set()
    count = 0
    for s in parts:
        if not s:
            raise PartitionError("partition contains an empty subset")
        for x in s:
            if x in seen:
                raise PartitionError(f"duplicate location label {x}")
            seen.add(x)
            count += 1
    if seen != set(range(1, count + 1)):
        raise PartitionError(
            f"labels must cover exactly 1..{count}, got {sorted(seen)}"
        )
    return tuple(sorted(parts, key=min))


def index(partition: Iterable[Sequence[int]]) -> int:
    """Index of a partition in the ordered solution space, in [0, M).

    The index is the size of all smaller-k subspaces plus a subindex
    computed by repeatedly removing the largest element.  Subset order of
    the input is irrelevant: the partition is canonicalized first.
    """
    parts = canonicalize(partition)
    n = sum(len(s) for s in parts)
    k = len(parts)
    base = sum(lah_recursive(n, j) for j in range(1, k))
    work = [list(s) for s in parts]
    return base + _subindex(n, k, work)


def _subindex(n: int, k: int, parts: list[list[int]]) -> int:
    # parts is canonical and is consumed destructively, largest element first.
    if n == 1:
        return 0
    for j, s in enumerate(parts):
        if s[-1] == n or n in s:
            break
    if len(parts[j]) == 1:
        # The singleton holding n is canonically last; dropping it keeps order.
        parts.pop(j)
        return _subindex(n - 1, k - 1, parts)
    q = parts[j].index(n)
    p = j + sum(len(parts[i]) for i in range(j)) + q
    parts[j].pop(q)
    return lah_recursive(n - 1, k - 1) + (n + k - 1) * _subindex(n - 1, k, parts) + p


def unindex(n: int, i: int) -> Partition:
    """Canonical partition whose index is i, for a problem of size n."""
    if n < 1:
        raise ValidationError("problem size n must be at least 1")
    if i < 0 or i >= cardinality(n):
        raise ValidationError(f"index {i} outside [0, {cardinality(n)}) for n={n}")
    sub = i
    for k in range(1, n + 1):
        size = lah_recursive(n, k)
        if sub < size:
            return _solution(n, k, sub)
        sub -= size
    raise AssertionError("unreachable: index was within cardinality")


def _solution(n: int, k: int, sub: int) -> Partition:
    # Decode a subindex into per-element placement decisions (e = n down to 2),
    # then replay them upward starting from the partition {(1,)}.
    decisions: list[int | None] = []
    nn, kk = n, k
    for _ in range(n, 1, -1):
        singles = lah_recursive(nn - 1, kk - 1)
        if sub < singles:
            decisions.append(None)
            nn -= 1
            kk -= 1
        else:
            sub -= singles
            width = nn + kk - 1
            decisions.append(sub % width)
            sub //= width
            nn -= 1
    parts: list[list[int]] = [[1]]
    for e, slot in zip(range(2, n + 1), reversed(decisions)):
        if slot is None:
            # New singleton: its minimum is the current largest label,
            # so canonical order places it last.
            parts.append([e])
        else:
            _insert_at_slot(parts, slot, e)
    return tuple(tuple(s) for s in parts)


def _insert_at_slot(parts: list[list[int]], slot: int, e: int) -> None:
    for s in parts:
        if slot <= len(s):
            s.insert(slot, e)
            return
        slot -= len(s) + 1
    raise AssertionError(f"slot {slot} beyond the last subset")


def enumerate_partitions(n: int) -> Iterator[Partition]:
    """Yield all M canonical partitions in index order.

    Equivalent to ``(unindex(n, i) for i in range(cardinality(n)))`` but
    generated directly, which is substantially faster for full sweeps.
    """
    if n < 1:
        raise ValidationError("problem size n must be at least 1")
    for k in range(1, n + 1):
        yield from _generate(n, k)


def _generate(n: int, k: int) -> Iterator[Partition]:
    if k < 1 or k > n:
        return
    if n == 1:
        yield ((1,),)
        return
    # Subindex order: all partitions with n in a singleton first, then for
    # each smaller partition every insertion slot of n, slot fastest.
    for part in _generate(n - 1, k - 1):
        yield part + ((n,),)
    width = n + k - 1
    for part in _generate(n - 1, k):
        for slot in range(width):
            yield _insert_tuple(part, slot, n)


def _insert_tuple(part: Partition, slot: int, e: int) -> Partition:
    out = []
    it = iter(part)
    for s in it:
        if slot <= len(s):
            out.append(s[:slot] + (e,) + s[slot:])
            out.extend(it)
            return tuple(out)
        slot -= len(s) + 1
        out.append(s)
    raise AssertionError(f"slot {slot} beyond the last subset")


def parse_solution(text: str) -> Partition:
    """Parse a partition literal such as ``[[1,2],[3]]`` (canonicalized)."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PartitionError(f"not a valid solution literal: {exc}") from exc
    if not isinstance(raw, list) or not all(isinstance(s, list) for s in raw):
        raise PartitionError("solution literal must be a list of lists of labels")
    return canonicalize(raw)


def format_solution(partition: Iterable[Sequence[int]]) -> str:
    """Serialize a partition as a nested integer list, e.g. ``[[1,2],[3]]``."""
    return json.dumps([list(s) for s in partition], separators=(",", ":"))
