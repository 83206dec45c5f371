"""Transfunctions on finite spaces and a sample-based audit of their properties.

A transfunction maps positive measures on ``X`` to positive measures on
``Y``. The concrete rules here are pushforwards along atom maps, Markov-type
kernels, the uniform spread ``mu -> mu(X) * uniform`` and two deliberately
nonlinear negative controls.

Property checks are written against an arbitrary measure map so the same code
audits both a transfunction and its signed extension (see ``extension``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Callable, Sequence

import numpy as np

from .measures import (
    NORM_TOL,
    MeasurableSpace,
    PositiveMeasure,
    SignedMeasure,
    SpaceMismatchError,
)

PROPERTIES = (
    "weakly_additive",
    "strongly_additive",
    "homogeneous",
    "monotone",
    "norm_preserving",
    "bounded",
    "setwise_continuous",
    "uniformly_continuous",
)

HOLDS = "holds_on_sample"
VIOLATED = "violated"
NOT_TESTED = "not_tested"

HOMOGENEITY_ALPHAS = (0.5, 2.0, 7.3)


# -- rules ------------------------------------------------------------------


@dataclass(frozen=True)
class Pushforward:
    """``Phi_f(mu)(B) = mu(f^{-1}(B))`` for an atom map ``f``."""

    mapping: tuple[int, ...]
    type = "pushforward"
    linear = True

    def validate(self, x: MeasurableSpace, y: MeasurableSpace) -> None:
        if len(self.mapping) != x.count:
            raise ValueError(f"map must be defined on all {x.count} atoms of X")
        if any(not 0 <= b < y.count for b in self.mapping):
            raise ValueError(f"map targets must lie in 0..{y.count - 1}")

    def evaluate(self, mass: np.ndarray, y: MeasurableSpace) -> np.ndarray:
        out = np.zeros(y.count)
        np.add.at(out, np.asarray(self.mapping, dtype=np.int64), mass)
        return out


@dataclass(frozen=True)
class Kernel:
    """``out(b) = sum_a mu(a) K[a, b]`` with nonnegative entries."""

    matrix: tuple[tuple[float, ...], ...]
    type = "kernel"
    linear = True

    @classmethod
    def of(cls, matrix) -> "Kernel":
        return cls(tuple(tuple(float(v) for v in row) for row in np.asarray(matrix, dtype=float)))

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    def validate(self, x: MeasurableSpace, y: MeasurableSpace) -> None:
        k = self.array
        if k.shape != (x.count, y.count):
            raise ValueError(f"kernel must be {x.count}x{y.count}, got {k.shape}")
        if not np.all(np.isfinite(k)) or np.any(k < 0):
            raise ValueError("kernel entries must be finite and nonnegative")

    def evaluate(self, mass: np.ndarray, y: MeasurableSpace) -> np.ndarray:
        return mass @ self.array


@dataclass(frozen=True)
class UniformSpread:
    """``mu -> mu(X) * uniform(Y)``; not induced by any atom map once ``|Y| >= 2``."""

    type = "uniform_spread"
    linear = True

    def validate(self, x, y) -> None:
        pass

    def evaluate(self, mass: np.ndarray, y: MeasurableSpace) -> np.ndarray:
        return np.full(y.count, np.sum(mass) / y.count)


@dataclass(frozen=True)
class SquareMassSpread:
    """Negative control ``mu -> mu(X)^2 * uniform(Y)``."""

    type = "square_mass_spread"
    linear = False

    def validate(self, x, y) -> None:
        pass

    def evaluate(self, mass: np.ndarray, y: MeasurableSpace) -> np.ndarray:
        return np.full(y.count, np.sum(mass) ** 2 / y.count)


@dataclass(frozen=True)
class ClampSpread:
    """Negative control ``mu -> min(mu(X), 1) * uniform(Y)``."""

    type = "clamp_spread"
    linear = False

    def validate(self, x, y) -> None:
        pass

    def evaluate(self, mass: np.ndarray, y: MeasurableSpace) -> np.ndarray:
        return np.full(y.count, min(float(np.sum(mass)), 1.0) / y.count)


RULES = {r.type: r for r in (Pushforward, Kernel, UniformSpread, SquareMassSpread, ClampSpread)}


@dataclass(frozen=True)
class Transfunction:
    domain: MeasurableSpace
    codomain: MeasurableSpace
    rule: Any
    declared: frozenset = frozenset()
    name: str = ""

    def __post_init__(self):
        unknown = set(self.declared) - set(PROPERTIES)
        if unknown:
            raise ValueError(f"unknown declared capabilities: {sorted(unknown)}")
        object.__setattr__(self, "declared", frozenset(self.declared))
        self.rule.validate(self.domain, self.codomain)

    def __call__(self, mu: PositiveMeasure) -> PositiveMeasure:
        return apply(self, mu)


def apply(phi: Transfunction, mu: PositiveMeasure) -> PositiveMeasure:
    if not isinstance(mu, PositiveMeasure):
        raise TypeError(f"transfunctions act on positive measures, got {type(mu).__name__}")
    if not mu.space.compatible(phi.domain):
        raise SpaceMismatchError(f"measure lives on {mu.space!r}, transfunction expects {phi.domain!r}")
    return PositiveMeasure._wrap(phi.codomain, phi.rule.evaluate(np.asarray(mu.mass), phi.codomain))


def structural_verdict(phi: Transfunction, prop: str) -> bool | None:
    """Exact answer where the rule's form decides the property; None otherwise."""
    rule = phi.rule
    if isinstance(rule, (Pushforward, UniformSpread)):
        return True
    if isinstance(rule, Kernel):
        if prop == "norm_preserving":
            return bool(np.allclose(rule.array.sum(axis=1), 1.0, rtol=0.0, atol=NORM_TOL))
        return True
    return None


# -- sampling ---------------------------------------------------------------


@dataclass(frozen=True)
class SamplerConfig:
    trials: int = 200
    seed: int = 0
    mass_scale: float = 1.0
    tol: float = NORM_TOL
    probe_length: int = 32
    probe_scale: float = 1e-5
    continuity_tol: float = 1e-6


def trial_rng(seed: int, stream: int, trial: int) -> np.random.Generator:
    """Independent generator per (seed, stream, trial); no state is shared between trials."""
    return np.random.default_rng([seed, stream, trial])


def random_mass(count: int, rng: np.random.Generator, scale: float = 1.0, signed: bool = False) -> np.ndarray:
    mass = rng.exponential(scale, count) * (rng.random(count) < 0.75)
    if signed:
        mass *= rng.choice([-1.0, 1.0], size=count)
    return mass


def random_positive(space: MeasurableSpace, rng, scale: float = 1.0) -> PositiveMeasure:
    return PositiveMeasure(space, random_mass(space.count, rng, scale))


def random_signed(space: MeasurableSpace, rng, scale: float = 1.0) -> SignedMeasure:
    return SignedMeasure(space, random_mass(space.count, rng, scale, signed=True))


# -- gaps: how far one input is from satisfying a property --------------------


def tv(m) -> float:
    return float(np.sum(np.abs(np.asarray(m.mass))))


def setwise_sup(m) -> float:
    """``sup_B |m(B)|`` for a signed measure on atoms."""
    mass = np.asarray(m.mass)
    return float(max(mass[mass > 0].sum(), -mass[mass < 0].sum()))


def additivity_gap(F: Callable, mu1, mu2) -> float:
    return tv(F(mu1 + mu2) - F(mu1) - F(mu2))


def subtractivity_gap(F: Callable, mu1, mu2) -> float:
    return tv(F(mu1 - mu2) - (F(mu1) - F(mu2)))


def homogeneity_gap(F: Callable, mu, alpha: float) -> float:
    return tv(F(mu * alpha) - F(mu) * alpha)


def monotonicity_gap(F: Callable, lower, upper) -> float:
    diff = np.asarray(F(lower).mass) - np.asarray(F(upper).mass)
    return float(max(diff.max(initial=0.0), 0.0))


def norm_gap(F: Callable, mu) -> float:
    return abs(tv(F(mu)) - tv(mu))


def bound_gap(F: Callable, mu, C: float) -> float:
    return max(tv(F(mu)) - C * tv(mu), 0.0)


BOUND_SCALES = tuple(10.0**k for k in range(-6, 9))


def ratio_profile(F: Callable, mu, scales=BOUND_SCALES) -> list[float]:
    n = tv(mu)
    return [tv(F(mu * t)) / (t * n) for t in scales] if n > 0 else []


def diverges(profile: Sequence[float], steps: int = 3, factor: float = 2.0) -> bool:
    """Ratio keeps growing at one end of the scale sweep."""
    if len(profile) < steps + 1:
        return False
    up = all(profile[-i] >= factor * profile[-i - 1] > 0 for i in range(1, steps + 1))
    down = all(profile[i] >= factor * profile[i + 1] > 0 for i in range(steps))
    return up or down


def continuity_residuals(F: Callable, mu, rho, length: int, metric: Callable) -> list[float]:
    base = F(mu)
    return [metric(F(mu + rho * (1.0 / n)) - base) for n in range(1, length + 1)]


def residuals_decay(res: Sequence[float], final_tol: float, scale: float = 1.0, slack: float = NORM_TOL) -> bool:
    """Residuals never grow and end below ``final_tol`` relative to ``max(1, scale)``."""
    monotone = all(b <= a + slack for a, b in zip(res, res[1:]))
    return monotone and res[-1] < final_tol * max(1.0, scale)


# -- reports ----------------------------------------------------------------


@dataclass
class PropertyEntry:
    name: str
    verdict: str
    trials: int = 0
    tol: float = NORM_TOL
    basis: str = "sample"
    witness: dict | None = None
    gap: float = 0.0
    estimate: float | None = None
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS


@dataclass
class PropertyReport:
    transfunction: str
    seed: int
    trials: int
    tol: float
    declared: tuple[str, ...]
    entries: dict[str, PropertyEntry] = field(default_factory=dict)

    @property
    def mismatches(self) -> list[str]:
        """Declared capabilities that the audit refuted."""
        return [p for p in self.declared if p in self.entries and self.entries[p].verdict == VIOLATED]

    @property
    def undeclared_holding(self) -> list[str]:
        return [p for p, e in self.entries.items() if e.holds and p not in self.declared]

    def holds(self, prop: str) -> bool:
        return prop in self.entries and self.entries[prop].holds

    @property
    def violations(self) -> list[str]:
        return [p for p, e in self.entries.items() if e.verdict == VIOLATED]


# -- generic sweeps shared by the positive audit and the signed-extension audit


def sweep_pairs(gap, probes, sampler, trials, tol):
    """Run ``gap(*args)`` over fixed probes then sampled inputs; stop at the first violation."""
    worst = 0.0
    for t in range(trials):
        args = probes[t] if t < len(probes) else sampler(t)
        g = gap(*args)
        worst = max(worst, g)
        if g > tol:
            return t + 1, args, g
    return trials, None, worst


def _entry(name, result, names, tol, basis="sample", note="") -> PropertyEntry:
    count, args, gap = result
    if args is None:
        return PropertyEntry(name, HOLDS, count, tol, basis, None, gap, note=note)
    return PropertyEntry(name, VIOLATED, count, tol, "sample", dict(zip(names, args)), gap, note=note)


def check_map_property(
    F: Callable,
    prop: str,
    space: MeasurableSpace,
    config: SamplerConfig,
    *,
    signed: bool = False,
    stream: int = 0,
    bound: float | None = None,
) -> PropertyEntry:
    """Audit one property of a measure map ``F`` on sampled inputs from ``space``.

    With ``signed=True`` inputs are signed measures and homogeneity is tested
    for negative scalars as well.
    """
    T, tol, scale = config.trials, config.tol, config.mass_scale
    draw = random_signed if signed else random_positive
    m = space.count
    unit = PositiveMeasure.dirac(space, 0)
    if signed:
        unit = unit.to_signed()

    def rng(t):
        return trial_rng(config.seed, stream, t)

    if prop == "weakly_additive":
        def sample(t):
            r = rng(t)
            split = r.random(m) < 0.5
            a, b = draw(space, r, scale), draw(space, r, scale)
            return (type(a)(space, np.where(split, a.mass, 0.0)), type(b)(space, np.where(split, 0.0, b.mass)))

        probes = [(unit, type(unit)(space, np.roll(unit.mass, 1)))] if m > 1 else []
        res = sweep_pairs(lambda a, b: additivity_gap(F, a, b), probes, sample, T, tol)
        return _entry(prop, res, ("mu1", "mu2"), tol)

    if prop == "strongly_additive":
        def sample(t):
            r = rng(t)
            return draw(space, r, scale), draw(space, r, scale)

        res = sweep_pairs(lambda a, b: additivity_gap(F, a, b), [(unit, unit)], sample, T, tol)
        return _entry(prop, res, ("mu1", "mu2"), tol)

    if prop == "homogeneous":
        alphas = HOMOGENEITY_ALPHAS + ((-1.0, -2.5, 0.0) if signed else ())

        def sample(t):
            r = rng(t)
            if t < 2 * len(alphas):
                alpha = alphas[t % len(alphas)]
            else:
                alpha = float(r.lognormal(0.0, 1.5)) * (r.choice([-1.0, 1.0]) if signed else 1.0)
            return draw(space, r, scale), alpha

        probes = [(unit, a) for a in alphas]
        res = sweep_pairs(lambda mu, a: homogeneity_gap(F, mu, a), probes, sample, T, tol)
        return _entry(prop, res, ("mu", "alpha"), tol)

    if prop == "monotone":
        def sample(t):
            r = rng(t)
            lower = draw(space, r, scale)
            bump = random_positive(space, r, scale)
            return lower, lower + bump

        res = sweep_pairs(lambda lo, hi: monotonicity_gap(F, lo, hi), [], sample, T, tol)
        return _entry(prop, res, ("lower", "upper"), tol)

    if prop == "norm_preserving":
        probes = []
        if signed and m > 1:
            probes.append((unit - type(unit)(space, np.roll(unit.mass, 1)),))
        diracs = [PositiveMeasure.dirac(space, a) for a in range(m)]
        probes += [(d.to_signed() if signed else d,) for d in diracs[: max(T // 2, 1)]]

        def sample(t):
            return (draw(space, rng(t), scale),)

        res = sweep_pairs(lambda mu: norm_gap(F, mu), probes, sample, T, tol)
        return _entry(prop, res, ("mu",), tol)

    if prop == "bounded":
        if bound is not None:
            def sample(t):
                return (draw(space, rng(t), scale),)

            res = sweep_pairs(lambda mu: bound_gap(F, mu, bound), [(unit,)], sample, T, tol)
            entry = _entry(prop, res, ("mu",), tol)
            entry.estimate = bound
            return entry
        best = 0.0
        for t in range(T):
            mu = unit if t == 0 else draw(space, rng(t), scale)
            profile = ratio_profile(F, mu)
            if not profile:
                continue
            if diverges(profile):
                return PropertyEntry(
                    prop, VIOLATED, t + 1, tol, "sample",
                    {"mu": mu, "scales": list(BOUND_SCALES), "ratios": profile},
                    float(max(profile)),
                    note="norm ratio grows without bound along the scaling sweep",
                )
            best = max(best, *profile)
        return PropertyEntry(prop, HOLDS, T, tol, "sample", None, 0.0, estimate=best)

    if prop in ("setwise_continuous", "uniformly_continuous"):
        metric = setwise_sup if prop == "setwise_continuous" else tv
        for t in range(T):
            r = rng(t)
            mu = draw(space, r, scale)
            rho = draw(space, r, 1.0)
            if tv(rho) == 0:
                continue
            rho = rho * (config.probe_scale / tv(rho))
            res = continuity_residuals(F, mu, rho, config.probe_length, metric)
            if not residuals_decay(res, config.continuity_tol, tv(F(mu))):
                return PropertyEntry(
                    prop, VIOLATED, t + 1, config.continuity_tol, "sample",
                    {"mu": mu, "rho": rho, "residuals": res}, float(res[-1]),
                )
        return PropertyEntry(prop, HOLDS, T, config.continuity_tol, "sample")

    raise ValueError(f"unknown property {prop!r}; expected one of {PROPERTIES}")


def check_property(phi: Transfunction, prop: str, config: SamplerConfig | None = None) -> PropertyEntry:
    config = config or SamplerConfig()
    if prop not in PROPERTIES:
        raise ValueError(f"unknown property {prop!r}; expected one of {PROPERTIES}")
    entry = check_map_property(phi, prop, phi.domain, config, stream=PROPERTIES.index(prop))
    exact = structural_verdict(phi, prop)
    if exact is not None and exact == entry.holds:
        entry.basis = "structural"
    return entry


def check_all(
    phi: Transfunction, config: SamplerConfig | None = None, properties: Sequence[str] | None = None
) -> PropertyReport:
    config = config or SamplerConfig()
    props = list(properties) if properties is not None else list(PROPERTIES)
    report = PropertyReport(
        phi.name or phi.rule.type, config.seed, config.trials, config.tol, tuple(sorted(phi.declared))
    )
    for prop in PROPERTIES:
        if prop in props:
            report.entries[prop] = check_property(phi, prop, config)
        else:
            report.entries[prop] = PropertyEntry(prop, NOT_TESTED, 0, config.tol)
    return report


def replay(phi: Transfunction, entry: PropertyEntry, config: SamplerConfig | None = None) -> bool:
    """Re-evaluate a recorded witness; True when it still shows the violation."""
    config = config or SamplerConfig()
    w = entry.witness
    if w is None:
        return False
    p = entry.name
    if p in ("weakly_additive", "strongly_additive"):
        return additivity_gap(phi, w["mu1"], w["mu2"]) > entry.tol
    if p == "homogeneous":
        return homogeneity_gap(phi, w["mu"], w["alpha"]) > entry.tol
    if p == "monotone":
        return monotonicity_gap(phi, w["lower"], w["upper"]) > entry.tol
    if p == "norm_preserving":
        return norm_gap(phi, w["mu"]) > entry.tol
    if p == "bounded":
        return diverges(ratio_profile(phi, w["mu"], w["scales"]))
    metric = setwise_sup if p == "setwise_continuous" else tv
    res = continuity_residuals(phi, w["mu"], w["rho"], len(w["residuals"]), metric)
    return not residuals_decay(res, config.continuity_tol, tv(phi(w["mu"])))


# -- operator norm ----------------------------------------------------------


class UnboundedError(ValueError):
    def __init__(self, entry: PropertyEntry):
        super().__init__("transfunction is unbounded on sample")
        self.entry = entry


@dataclass(frozen=True)
class OperatorNorm:
    value: float
    method: str  # "exact" or "lower_bound"


def operator_norm(phi: Transfunction, config: SamplerConfig | None = None) -> OperatorNorm:
    """``||Phi||``; exact for linear rules as the largest image norm of a unit Dirac.

    For additive, homogeneous maps ``||Phi mu|| <= sum_a mu(a) ||Phi delta_a||``
    and a Dirac attains the maximum. Other rules get the sampled supremum.
    """
    if phi.rule.linear:
        value = max(tv(apply(phi, PositiveMeasure.dirac(phi.domain, a))) for a in range(phi.domain.count))
        return OperatorNorm(float(value), "exact")
    entry = check_property(phi, "bounded", config)
    if not entry.holds:
        raise UnboundedError(entry)
    return OperatorNorm(float(entry.estimate or 0.0), "lower_bound")


# -- is a transfunction induced by some function? ----------------------------


def pushforward_candidates(phi: Transfunction, limit: int = 200_000, samples: int = 8) -> list[tuple[int, ...]]:
    """Every atom map ``f`` with ``Phi_f = Phi`` on Diracs and on a few random measures."""
    x, y = phi.domain, phi.codomain
    if y.count**x.count > limit:
        raise ValueError(f"{y.count}^{x.count} maps exceed the enumeration limit {limit}")
    probes = [PositiveMeasure.dirac(x, a) for a in range(x.count)]
    probes += [random_positive(x, trial_rng(0, 99, t)) for t in range(samples)]
    targets = [apply(phi, mu) for mu in probes]
    found = []
    for f in itertools.product(range(y.count), repeat=x.count):
        rule = Pushforward(f)
        if all(np.allclose(rule.evaluate(np.asarray(mu.mass), y), out.mass, atol=NORM_TOL, rtol=0.0)
               for mu, out in zip(probes, targets)):
            found.append(f)
    return found


def with_declared(phi: Transfunction, *props: str) -> Transfunction:
    return replace(phi, declared=frozenset(props))
