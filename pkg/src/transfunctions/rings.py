"""Rings of subsets of a finite ground set and extension of additive set functions.

Atom-sets are coded as Python ints (bit ``i`` set means atom ``i`` belongs to
the set). A signed representation ``S ~ sum a_n A_n`` lists ``(a_n, A_n)``
pairs with ``a_n`` in ``{-1, +1}`` and is valid when the indicator sums
agree with ``S`` at every atom.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .measures import ATOMIC, NORM_TOL, BanachSpaceSpec, MeasurableSpace
from .partitions import partition_supremum

MAX_RING_ATOMS = 16
MAX_SEARCH_TERMS = 8
DEFAULT_MAX_TERMS = 6


def to_mask(atoms: Iterable[int]) -> int:
    m = 0
    for a in atoms:
        a = int(a)
        if a < 0:
            raise IndexError(f"negative atom index {a}")
        m |= 1 << a
    return m


def from_mask(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def lex_key(mask: int) -> tuple[int, ...]:
    """Order atom-sets by their sorted index tuples."""
    return from_mask(mask)


def indicator(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> i) & 1 for i in range(n)], dtype=np.int64)


@dataclass(frozen=True)
class SetRing:
    ground: MeasurableSpace
    generators: tuple[int, ...]
    atoms: tuple[int, ...]
    members: frozenset = field(repr=False)

    def __contains__(self, mask: int) -> bool:
        return mask in self.members

    def sorted_members(self) -> list[int]:
        return sorted(self.members, key=lex_key)

    def atoms_of(self, mask: int) -> list[int]:
        """Indices of the ring atoms making up a member."""
        return [i for i, a in enumerate(self.atoms) if a & mask]


def _unions(blocks: Sequence[int]) -> frozenset:
    members = {0}
    for b in blocks:
        members |= {m | b for m in members}
    return frozenset(members)


def ring_closure(ground: MeasurableSpace, generators: Iterable[Iterable[int]]) -> SetRing:
    """Least family containing the generators and the empty set closed under union and difference.

    Iterates to a fixpoint on the partition of covered atoms into classes that
    no member separates; the ring is then every union of those classes.
    """
    if ground.kind != ATOMIC:
        raise ValueError("rings are built over atomic ground spaces")
    if ground.count > MAX_RING_ATOMS:
        raise ValueError(f"ground too large: {ground.count} atoms (limit {MAX_RING_ATOMS})")
    gens = []
    for g in generators:
        idx = ground.atom_set(g)
        gens.append(to_mask(idx.tolist()))
    blocks: list[int] = []
    changed = True
    while changed:
        changed = False
        for g in gens:
            covered = 0
            refined = []
            for b in blocks:
                covered |= b
                for part in (b & g, b & ~g):
                    if part:
                        refined.append(part)
            fresh = g & ~covered
            if fresh:
                refined.append(fresh)
            if len(refined) != len(blocks):
                changed = True
            blocks = refined
    blocks.sort(key=lex_key)
    return SetRing(ground, tuple(gens), tuple(blocks), _unions(blocks))


class RingSetFunction:
    """A set function on the members of a ring, possibly non-additive."""

    def __init__(self, ring: SetRing, codomain: BanachSpaceSpec, assignment: Mapping[int, np.ndarray]):
        missing = [m for m in ring.members if m not in assignment]
        if missing:
            raise ValueError(
                f"assignment misses ring members, e.g. {list(from_mask(min(missing, key=lex_key)))}"
            )
        extra = [m for m in assignment if m not in ring.members]
        if extra:
            raise ValueError(f"{list(from_mask(extra[0]))} is not a ring member")
        self.ring = ring
        self.codomain = codomain
        self.assignment = {}
        for m, v in assignment.items():
            v = np.atleast_1d(np.asarray(v, dtype=float))
            if v.shape != (codomain.dimension,):
                raise ValueError(f"value for {list(from_mask(m))} has shape {v.shape}")
            v.setflags(write=False)
            self.assignment[m] = v

    @classmethod
    def induced(cls, ring: SetRing, weights, codomain: BanachSpaceSpec | None = None) -> "RingSetFunction":
        """``f(A) = sum of atom weights over A``; always additive."""
        w = np.asarray(weights, dtype=float)
        if w.ndim == 1:
            w = w[:, None]
        codomain = codomain or BanachSpaceSpec(w.shape[1], "L2")
        if w.shape != (ring.ground.count, codomain.dimension):
            raise ValueError(f"weights must have shape {(ring.ground.count, codomain.dimension)}")
        return cls(ring, codomain, {m: w[list(from_mask(m))].sum(axis=0) for m in ring.members})

    def __call__(self, mask: int) -> np.ndarray:
        try:
            return self.assignment[mask]
        except KeyError:
            raise KeyError(f"{list(from_mask(mask))} is not a ring member") from None


@dataclass(frozen=True)
class AdditivityViolation:
    left: tuple[int, ...]
    right: tuple[int, ...]
    gap: float


def validate_additivity(f: RingSetFunction, tol: float = NORM_TOL) -> list[AdditivityViolation]:
    """Every disjoint pair of members whose values fail to add up; empty iff ``f`` is additive.

    ``f(empty) != 0`` is reported as the pair ``((), ())``.
    """
    norm = f.codomain.norm_of
    out = []
    gap0 = float(norm(f(0)))
    if gap0 > tol:
        out.append(AdditivityViolation((), (), gap0))
    members = [m for m in f.ring.sorted_members() if m]
    for i, a in enumerate(members):
        for b in members[i + 1 :]:
            if a & b:
                continue
            gap = float(norm(f(a | b) - f(a) - f(b)))
            if gap > tol:
                out.append(AdditivityViolation(from_mask(a), from_mask(b), gap))
    return out


@dataclass(frozen=True)
class SignedRepresentation:
    terms: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for sign, _ in self.terms:
            if sign not in (-1, 1):
                raise ValueError(f"signs must be +1 or -1, got {sign}")

    def pointwise(self, n: int) -> np.ndarray:
        total = np.zeros(n, dtype=np.int64)
        for sign, mask in self.terms:
            total += sign * indicator(mask, n)
        return total

    def represents(self, target: int, n: int) -> bool:
        return bool(np.array_equal(self.pointwise(n), indicator(target, n)))

    def as_lists(self) -> list[tuple[int, list[int]]]:
        return [(s, list(from_mask(m))) for s, m in self.terms]


def _signed_candidates(masks: Iterable[int]) -> list[tuple[int, int]]:
    ordered = sorted({m for m in masks if m}, key=lex_key)
    return [(s, m) for m in ordered for s in (1, -1)]


def enumerate_representations(
    target: int,
    ring: SetRing,
    max_terms: int = DEFAULT_MAX_TERMS,
    family: Iterable[int] | None = None,
) -> Iterator[SignedRepresentation]:
    """All valid signed representations of ``target`` by breadth-first term count.

    Terms come from ``family`` (default: every ring member). Within one term
    count, candidates follow lexicographic member order. A term and its
    negation never appear together.
    """
    if max_terms > MAX_SEARCH_TERMS:
        raise ValueError(f"max_terms limited to {MAX_SEARCH_TERMS}")
    n = ring.ground.count
    # every signed sum of members is constant on ring atoms and zero off them
    if target not in ring.members:
        return
    cands = _signed_candidates(ring.members if family is None else family)
    for m in cands:
        if m[1] not in ring.members:
            raise ValueError(f"{list(from_mask(m[1]))} is not a ring member")
    vecs = np.array([s * indicator(m, n) for s, m in cands], dtype=np.int64).reshape(len(cands), n)
    goal = indicator(target, n)
    start = 0 if target == 0 else 1
    for k in range(start, max_terms + 1):
        for combo in itertools.combinations_with_replacement(range(len(cands)), k):
            used = {cands[i] for i in combo}
            if any((-s, m) in used for s, m in used):
                continue
            total = vecs[list(combo)].sum(axis=0) if combo else np.zeros(n, dtype=np.int64)
            if np.array_equal(total, goal):
                yield SignedRepresentation(tuple(cands[i] for i in combo))


def represent(
    target: Iterable[int] | int,
    ring: SetRing,
    max_terms: int = DEFAULT_MAX_TERMS,
    family: Iterable[int] | None = None,
) -> SignedRepresentation | None:
    """Shortest signed representation of ``target`` from ring members, or None if there is none within the bound."""
    mask = target if isinstance(target, int) else to_mask(target)
    if mask == 0:
        return SignedRepresentation(())
    return next(enumerate_representations(mask, ring, max_terms, family), None)


def extend_set_function(f: RingSetFunction, rep: SignedRepresentation, target: int | None = None) -> np.ndarray:
    """``sum a_n f(A_n)`` for a valid representation."""
    n = f.ring.ground.count
    values = rep.pointwise(n)
    if not np.all((values == 0) | (values == 1)):
        raise ValueError("representation does not sum to an indicator function")
    if target is not None and not rep.represents(target, n):
        raise ValueError("representation does not match the target set")
    out = np.zeros(f.codomain.dimension)
    for sign, mask in rep.terms:
        out = out + sign * f(mask)
    return out


def _null_identity(ring: SetRing, rng: np.random.Generator) -> list[tuple[int, int]]:
    """One randomly chosen elementary representation of the empty set."""
    members = ring.sorted_members()
    a = members[rng.integers(len(members))]
    b = members[rng.integers(len(members))]
    kind = rng.integers(4)
    if kind == 0:
        terms = [(1, a), (-1, a)]
    elif kind == 1:
        terms = [(1, a), (-1, a & b), (-1, a & ~b)]
    elif kind == 2:
        terms = [(1, a | b), (-1, a), (-1, b & ~a)]
    else:
        terms = [(1, a | b), (1, a & b), (-1, a), (-1, b)]
    return [t for t in terms if t[1]]


def random_empty_representation(
    ring: SetRing, rng: np.random.Generator, max_terms: int = MAX_SEARCH_TERMS
) -> SignedRepresentation | None:
    """A random candidate built from elementary null identities, kept only if pointwise valid."""
    terms: list[tuple[int, int]] = []
    for _ in range(rng.integers(1, 4)):
        terms += _null_identity(ring, rng)
    if not terms or len(terms) > max_terms:
        return None
    order = rng.permutation(len(terms))
    rep = SignedRepresentation(tuple(terms[i] for i in order))
    return rep if rep.represents(0, ring.ground.count) else None


@dataclass
class EmptyRepresentationReport:
    tested: list[SignedRepresentation]
    residuals: list[float]
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


def empty_representation_check(
    f: RingSetFunction,
    trials: int = 200,
    seed: int = 0,
    max_terms: int = MAX_SEARCH_TERMS,
    tol: float = 1e-12,
) -> EmptyRepresentationReport:
    """Sum ``f`` over random valid representations of the empty set; each must vanish."""
    rng = np.random.default_rng(seed)
    tested, residuals = [], []
    attempts = 0
    while len(tested) < trials:
        attempts += 1
        if attempts > 100 * trials:
            break
        rep = random_empty_representation(f.ring, rng, max_terms)
        if rep is None:
            continue
        tested.append(rep)
        residuals.append(float(f.codomain.norm_of(extend_set_function(f, rep, target=0))))
    return EmptyRepresentationReport(tested, residuals, tol)


def ring_variation(f: RingSetFunction, max_ring_atoms: int = 12) -> dict[int, float]:
    """Variation of ``f`` on every member, as a supremum over partitions into ring members."""
    atoms = f.ring.atoms
    if len(atoms) > max_ring_atoms:
        raise ValueError(f"ring has {len(atoms)} atoms; partition enumeration limited to {max_ring_atoms}")

    def member(code: int) -> int:
        m = 0
        for i, a in enumerate(atoms):
            if code >> i & 1:
                m |= a
        return m

    best = partition_supremum(
        lambda code: float(f.codomain.norm_of(f(member(code)))), (1 << len(atoms)) - 1
    )
    return {member(code): v for code, v in best.items()}
