"""Finite measurable spaces and positive, signed and vector-valued measures.

Every measure stores one value per atom. The sigma-algebra is always the full
power set of atoms, so a measurable set is simply a collection of atom
indices. Grid spaces model ``[0, 1)`` cut into ``N`` equal cells; densities
given on a grid are converted to per-cell masses at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Union

import numpy as np

SUPPORT_TOL = 1e-12
NORM_TOL = 1e-9

ATOMIC = "atomic"
GRID = "grid"

NORMS = ("L1", "L2", "Linf")


class SpaceMismatchError(ValueError):
    """Raised when measures on incompatible spaces are combined."""


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MeasurableSpace:
    kind: str
    count: int
    labels: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in (ATOMIC, GRID):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"atom count must be a positive integer, got {self.count!r}")
        if self.kind == GRID and self.count & (self.count - 1):
            raise ValueError(f"grid cell count must be a power of two, got {self.count}")
        if self.labels is not None and len(self.labels) != self.count:
            raise ValueError("labels must name every atom")

    @classmethod
    def atomic(cls, count: int, labels: Iterable | None = None) -> "MeasurableSpace":
        return cls(ATOMIC, count, tuple(labels) if labels is not None else None)

    @classmethod
    def grid(cls, cells: int) -> "MeasurableSpace":
        return cls(GRID, cells)

    def compatible(self, other: "MeasurableSpace") -> bool:
        return self.kind == other.kind and self.count == other.count

    def cell_width(self) -> float:
        return 1.0 / self.count if self.kind == GRID else 1.0

    def atom_set(self, atoms: Iterable[int]) -> np.ndarray:
        """Validate a collection of atom indices and return it as a sorted index array."""
        idx = np.unique(np.fromiter((int(a) for a in atoms), dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= self.count):
            bad = idx[(idx < 0) | (idx >= self.count)]
            raise IndexError(f"atom index {int(bad[0])} out of range for {self.count} atoms")
        return idx

    def __repr__(self):
        return f"MeasurableSpace({self.kind!r}, {self.count})"


@dataclass(frozen=True)
class BanachSpaceSpec:
    """The codomain ``R^d`` under one of the L1, L2 or Linf norms."""

    dimension: int
    norm: str = "L2"

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dimension!r}")
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}, got {self.norm!r}")

    def norm_of(self, v, axis: int = -1):
        """Norm of a vector, or of every row along ``axis``."""
        v = np.asarray(v, dtype=float)
        if self.norm == "L1":
            return np.sum(np.abs(v), axis=axis)
        if self.norm == "L2":
            return np.sqrt(np.sum(v * v, axis=axis))
        return np.max(np.abs(v), axis=axis, initial=0.0)


def _check_space(a: MeasurableSpace, b: MeasurableSpace) -> None:
    if not a.compatible(b):
        raise SpaceMismatchError(f"incompatible spaces {a!r} and {b!r}")


class _ScalarMeasure:
    space: MeasurableSpace
    mass: np.ndarray

    @classmethod
    def _wrap(cls, space: MeasurableSpace, mass: np.ndarray):
        """Skip validation for masses produced by arithmetic on valid measures."""
        obj = cls.__new__(cls)
        mass = np.asarray(mass, dtype=float)
        mass.setflags(write=False)
        object.__setattr__(obj, "space", space)
        object.__setattr__(obj, "mass", mass)
        return obj

    def __len__(self):
        return self.space.count

    def total(self) -> float:
        return float(np.sum(self.mass))

    def norm(self) -> float:
        """Total variation norm ``|mu|(X)``."""
        return float(np.sum(np.abs(self.mass)))

    def of(self, atoms: Iterable[int]) -> float:
        return float(np.sum(self.mass[self.space.atom_set(atoms)]))

    def restrict(self, atoms: Iterable[int]):
        keep = np.zeros(self.space.count, dtype=bool)
        keep[self.space.atom_set(atoms)] = True
        return type(self)._wrap(self.space, np.where(keep, self.mass, 0.0))

    def support(self, tol: float = SUPPORT_TOL) -> np.ndarray:
        return np.flatnonzero(np.abs(self.mass) > tol)

    def to_signed(self) -> "SignedMeasure":
        return SignedMeasure._wrap(self.space, self.mass)

    def allclose(self, other, atol: float = NORM_TOL) -> bool:
        _check_space(self.space, other.space)
        return bool(np.allclose(self.mass, other.mass, rtol=0.0, atol=atol))

    def __eq__(self, other):
        if not isinstance(other, _ScalarMeasure):
            return NotImplemented
        return (
            type(self) is type(other)
            and self.space.compatible(other.space)
            and np.array_equal(self.mass, other.mass)
        )

    __hash__ = None

    def __neg__(self) -> "SignedMeasure":
        return SignedMeasure._wrap(self.space, -self.mass)

    def __sub__(self, other) -> "SignedMeasure":
        if not isinstance(other, _ScalarMeasure):
            return NotImplemented
        _check_space(self.space, other.space)
        return SignedMeasure._wrap(self.space, self.mass - other.mass)

    def __repr__(self):
        return f"{type(self).__name__}({self.space.kind}:{self.space.count}, {self.mass.tolist()})"


class PositiveMeasure(_ScalarMeasure):
    """A finite nonnegative measure given by its atom masses."""

    def __init__(self, space: MeasurableSpace, mass):
        mass = _frozen(mass)
        if mass.shape != (space.count,):
            raise ValueError(f"expected {space.count} masses, got shape {mass.shape}")
        if not np.all(np.isfinite(mass)):
            raise ValueError("masses must be finite")
        if np.any(mass < 0):
            raise ValueError(f"positive measure has negative mass at atom {int(np.argmax(mass < 0))}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "mass", mass)

    def __setattr__(self, name, value):
        raise AttributeError("measures are immutable")

    @classmethod
    def zero(cls, space: MeasurableSpace) -> "PositiveMeasure":
        return cls(space, np.zeros(space.count))

    @classmethod
    def dirac(cls, space: MeasurableSpace, atom: int, weight: float = 1.0) -> "PositiveMeasure":
        mass = np.zeros(space.count)
        mass[space.atom_set([atom])] = weight
        return cls(space, mass)

    @classmethod
    def uniform(cls, space: MeasurableSpace, total: float = 1.0) -> "PositiveMeasure":
        """Uniform distribution of ``total`` over the atoms (Lebesgue measure on a grid)."""
        return cls(space, np.full(space.count, total / space.count))

    @classmethod
    def from_density(cls, space: MeasurableSpace, density) -> "PositiveMeasure":
        return cls(space, np.asarray(density, dtype=float) * space.cell_width())

    def norm(self) -> float:
        return self.total()

    def __add__(self, other):
        if isinstance(other, PositiveMeasure):
            _check_space(self.space, other.space)
            return PositiveMeasure._wrap(self.space, self.mass + other.mass)
        if isinstance(other, SignedMeasure):
            _check_space(self.space, other.space)
            return SignedMeasure._wrap(self.space, self.mass + other.mass)
        return NotImplemented

    def __mul__(self, alpha):
        alpha = float(alpha)
        if alpha < 0:
            raise ValueError("negative scaling of a positive measure; call .to_signed() first")
        if not np.isfinite(alpha):
            raise ValueError("scale factor must be finite")
        return PositiveMeasure._wrap(self.space, alpha * self.mass)

    __rmul__ = __mul__

    def __le__(self, other) -> bool:
        _check_space(self.space, other.space)
        return bool(np.all(self.mass <= other.mass))


class SignedMeasure(_ScalarMeasure):
    """A real-valued measure of bounded variation."""

    def __init__(self, space: MeasurableSpace, mass):
        mass = _frozen(mass)
        if mass.shape != (space.count,):
            raise ValueError(f"expected {space.count} masses, got shape {mass.shape}")
        if not np.all(np.isfinite(mass)):
            raise ValueError("masses must be finite")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "mass", mass)

    def __setattr__(self, name, value):
        raise AttributeError("measures are immutable")

    @classmethod
    def zero(cls, space: MeasurableSpace) -> "SignedMeasure":
        return cls(space, np.zeros(space.count))

    def __add__(self, other):
        if not isinstance(other, _ScalarMeasure):
            return NotImplemented
        _check_space(self.space, other.space)
        return SignedMeasure._wrap(self.space, self.mass + other.mass)

    __radd__ = __add__

    def __rsub__(self, other):
        if not isinstance(other, _ScalarMeasure):
            return NotImplemented
        _check_space(self.space, other.space)
        return SignedMeasure._wrap(self.space, other.mass - self.mass)

    def __mul__(self, alpha):
        if not np.isfinite(alpha):
            raise ValueError("scale factor must be finite")
        return SignedMeasure._wrap(self.space, float(alpha) * self.mass)

    __rmul__ = __mul__

    def __le__(self, other) -> bool:
        _check_space(self.space, other.space)
        return bool(np.all(self.mass <= other.mass))

    def is_positive(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.mass >= -tol))


class VectorMeasure:
    """An ``R^d``-valued measure: one vector per atom, shape ``(count, d)``."""

    def __init__(self, space: MeasurableSpace, codomain: BanachSpaceSpec, values):
        values = _frozen(values)
        if values.ndim == 1 and codomain.dimension == 1:
            values = _frozen(values.reshape(-1, 1))
        if values.shape != (space.count, codomain.dimension):
            raise ValueError(
                f"expected values of shape {(space.count, codomain.dimension)}, got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "codomain", codomain)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("measures are immutable")

    @classmethod
    def zero(cls, space: MeasurableSpace, codomain: BanachSpaceSpec) -> "VectorMeasure":
        return cls(space, codomain, np.zeros((space.count, codomain.dimension)))

    @classmethod
    def embed(cls, mu: _ScalarMeasure, codomain: BanachSpaceSpec | None = None) -> "VectorMeasure":
        """View a scalar measure as a one-dimensional vector measure."""
        codomain = codomain or BanachSpaceSpec(1, "L1")
        if codomain.dimension != 1:
            raise ValueError("scalar measures embed only into dimension 1")
        return cls(mu.space, codomain, np.asarray(mu.mass).reshape(-1, 1))

    @classmethod
    def from_terms(cls, space, codomain, terms) -> "VectorMeasure":
        """Build ``sum v_n mu_n`` from ``(vector, PositiveMeasure)`` pairs."""
        values = np.zeros((space.count, codomain.dimension))
        for v, mu in terms:
            _check_space(space, mu.space)
            values += np.outer(mu.mass, np.asarray(v, dtype=float))
        return cls(space, codomain, values)

    @cached_property
    def atom_norms(self) -> np.ndarray:
        return self.codomain.norm_of(self.values, axis=1)

    def of(self, atoms: Iterable[int]) -> np.ndarray:
        return self.values[self.space.atom_set(atoms)].sum(axis=0)

    def norm(self) -> float:
        """``|omega|(X)``."""
        return float(np.sum(self.atom_norms))

    def _combine(self, other, sign):
        if not isinstance(other, VectorMeasure):
            return NotImplemented
        _check_space(self.space, other.space)
        if self.codomain != other.codomain:
            raise SpaceMismatchError(f"codomains differ: {self.codomain} vs {other.codomain}")
        return VectorMeasure(self.space, self.codomain, self.values + sign * other.values)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return VectorMeasure(self.space, self.codomain, -self.values)

    def __mul__(self, alpha):
        return VectorMeasure(self.space, self.codomain, float(alpha) * self.values)

    __rmul__ = __mul__

    def allclose(self, other: "VectorMeasure", atol: float = NORM_TOL) -> bool:
        _check_space(self.space, other.space)
        return bool(np.allclose(self.values, other.values, rtol=0.0, atol=atol))

    def __eq__(self, other):
        if not isinstance(other, VectorMeasure):
            return NotImplemented
        return (
            self.space.compatible(other.space)
            and self.codomain == other.codomain
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"VectorMeasure({self.space.kind}:{self.space.count}, "
            f"{self.codomain.norm}^{self.codomain.dimension}, {self.values.tolist()})"
        )


Measure = Union[PositiveMeasure, SignedMeasure, VectorMeasure]


def measure_of(mu: Measure, atoms: Iterable[int]):
    """Evaluate ``mu`` on the set of the given atoms. The empty set has measure zero."""
    return mu.of(atoms)


def jordan_decompose(mu: SignedMeasure) -> tuple[PositiveMeasure, PositiveMeasure]:
    """Split ``mu`` into mutually singular positive and negative parts."""
    mass = np.asarray(mu.mass)
    return (
        PositiveMeasure._wrap(mu.space, np.maximum(mass, 0.0)),
        PositiveMeasure._wrap(mu.space, np.maximum(-mass, 0.0)),
    )


def total_variation(omega: VectorMeasure) -> PositiveMeasure:
    """The variation ``|omega|``; on atoms it is the norm of each atom's value.

    The atomic partition is the finest one, and refining a partition never
    lowers the sum of block norms, so the supremum is attained there.
    """
    return PositiveMeasure(omega.space, omega.atom_norms)


def mutually_singular(mu1: PositiveMeasure, mu2: PositiveMeasure, tol: float = SUPPORT_TOL) -> bool:
    _check_space(mu1.space, mu2.space)
    return not bool(np.any((mu1.mass > tol) & (mu2.mass > tol)))


def as_signed(mu: _ScalarMeasure) -> SignedMeasure:
    return mu if isinstance(mu, SignedMeasure) else mu.to_signed()
