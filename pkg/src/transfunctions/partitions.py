"""Brute-force variation: supremum of block-norm sums over set partitions.

This is the literal definition of the variation and serves as the
independent check on :func:`transfunctions.measures.total_variation`, which
uses the atomwise shortcut.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .measures import VectorMeasure

MAX_ORACLE_ATOMS = 10


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    """Yield every partition of ``items`` into nonempty blocks (Bell-number many)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in set_partitions(rest):
        yield [[first], *smaller]
        for i in range(len(smaller)):
            yield smaller[:i] + [[first, *smaller[i]]] + smaller[i + 1 :]


def _mask(atoms: Iterable[int]) -> int:
    m = 0
    for a in atoms:
        m |= 1 << int(a)
    return m


def subset_norm_table(omega: VectorMeasure, atoms: Sequence[int]) -> np.ndarray:
    """``table[k] = ||omega(B_k)||`` where ``B_k`` is the subset of ``atoms`` coded by bits of ``k``."""
    atoms = list(atoms)
    n = len(atoms)
    sums = np.zeros((1 << n, omega.codomain.dimension))
    for bit, a in enumerate(atoms):
        step = 1 << bit
        # subsets containing this bit = subset without it + the atom's value
        sums[step : 2 * step] = sums[:step] + omega.values[a]
    return omega.codomain.norm_of(sums, axis=1)


def partition_supremum(weight: Callable[[int], float], full: int) -> dict[int, float]:
    """Exhaustive supremum of ``sum weight(block)`` over all partitions of every subset of ``full``.

    Every partition of ``A`` is a block containing the lowest element of
    ``A`` followed by a partition of the rest, so the recursion visits the
    whole partition lattice; subresults are shared between subsets.
    """
    best: dict[int, float] = {0: 0.0}

    def solve(a: int) -> float:
        if a in best:
            return best[a]
        low = a & -a
        rest = a ^ low
        top = -np.inf
        sub = rest
        while True:
            block = sub | low
            top = max(top, weight(block) + solve(a ^ block))
            if sub == 0:
                break
            sub = (sub - 1) & rest
        best[a] = top
        return top

    sub = full
    while True:
        solve(sub)
        if sub == 0:
            break
        sub = (sub - 1) & full
    return best


def total_variation_oracle(omega: VectorMeasure, atoms: Iterable[int]) -> float:
    """``sup`` over every set partition ``pi`` of ``atoms`` of ``sum_{B in pi} ||omega(B)||``."""
    idx = [int(a) for a in omega.space.atom_set(atoms)]
    if len(idx) > MAX_ORACLE_ATOMS:
        raise ValueError(f"partition enumeration limited to {MAX_ORACLE_ATOMS} atoms, got {len(idx)}")
    table = subset_norm_table(omega, idx)
    best = 0.0
    for partition in set_partitions(range(len(idx))):
        best = max(best, float(sum(table[_mask(block)] for block in partition)))
    return best


def variation_oracle_table(omega: VectorMeasure) -> dict[frozenset, float]:
    """Partition supremum for every atom-set of a small space, keyed by frozenset of atoms."""
    n = omega.space.count
    if n > MAX_ORACLE_ATOMS:
        raise ValueError(f"partition enumeration limited to {MAX_ORACLE_ATOMS} atoms, got {n}")
    table = subset_norm_table(omega, range(n))
    best = partition_supremum(lambda b: float(table[b]), (1 << n) - 1)
    return {frozenset(i for i in range(n) if k >> i & 1): v for k, v in best.items()}
