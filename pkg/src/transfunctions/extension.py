"""Extending transfunctions from positive measures to signed and vector measures.

Signed measures go through their Jordan parts, ``Phi~ mu = Phi mu+ - Phi mu-``.
Vector measures are handled as finite series ``sum v_n mu_n`` of vectors times
positive measures, with ``Phi~(sum v_n mu_n) = sum v_n Phi mu_n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .algebra import (
    HOLDS,
    NOT_TESTED,
    VIOLATED,
    PropertyEntry,
    PropertyReport,
    SamplerConfig,
    Transfunction,
    Pushforward,
    UniformSpread,
    additivity_gap,
    apply,
    check_all,
    check_map_property,
    operator_norm,
    random_positive,
    random_signed,
    subtractivity_gap,
    sweep_pairs,
    trial_rng,
    tv,
)
from .measures import (
    NORM_TOL,
    BanachSpaceSpec,
    MeasurableSpace,
    PositiveMeasure,
    SignedMeasure,
    SpaceMismatchError,
    VectorMeasure,
    as_signed,
    jordan_decompose,
    total_variation,
)

# -- signed extension ---------------------------------------------------------


def extend_signed(phi: Transfunction, mu: SignedMeasure | PositiveMeasure) -> SignedMeasure:
    mu = as_signed(mu)
    if not mu.space.compatible(phi.domain):
        raise SpaceMismatchError(f"measure lives on {mu.space!r}, transfunction expects {phi.domain!r}")
    plus, minus = jordan_decompose(mu)
    return apply(phi, plus) - apply(phi, minus)


class SignedExtension:
    """``mu -> Phi mu+ - Phi mu-`` as a callable on signed (or positive) measures."""

    def __init__(self, phi: Transfunction):
        self.phi = phi

    def __call__(self, mu) -> SignedMeasure:
        return extend_signed(self.phi, mu)


# clause -> (properties Phi must have, whether the transfer is expected to hold)
CLAUSES = {
    "a": (("weakly_additive",), True),
    "b": (("strongly_additive",), True),
    "c": (("homogeneous",), True),
    "d": (("monotone", "strongly_additive"), True),
    "e": (("norm_preserving",), False),
    "f": (("bounded",), True),
    "g": (("setwise_continuous",), True),
    "h": (("uniformly_continuous",), True),
    "difference": (("strongly_additive",), True),
    "antisymmetric": ((), True),
}

CLAUSE_PROPERTY = {
    "b": "strongly_additive",
    "c": "homogeneous",
    "d": "monotone",
    "e": "norm_preserving",
    "g": "setwise_continuous",
    "h": "uniformly_continuous",
}


@dataclass
class ClauseResult:
    clause: str
    hypotheses: tuple[str, ...]
    hypothesis_holds: bool
    expected: str  # "transfers" or "may_fail"
    entry: PropertyEntry

    @property
    def verdict(self) -> str:
        return self.entry.verdict

    @property
    def unexpected(self) -> bool:
        """A sampled counterexample to a transfer that should hold."""
        return self.hypothesis_holds and self.expected == "transfers" and self.verdict == VIOLATED


@dataclass
class ExtensionReport:
    transfunction: str
    seed: int
    trials: int
    base: PropertyReport
    clauses: dict[str, ClauseResult] = field(default_factory=dict)

    @property
    def findings(self) -> list[str]:
        return [c for c, r in self.clauses.items() if r.unexpected]

    @property
    def violations(self) -> list[str]:
        return [c for c, r in self.clauses.items() if r.verdict == VIOLATED]


def _singular_signed_pair(space, rng, scale):
    split = rng.random(space.count) < 0.5
    a, b = random_signed(space, rng, scale), random_signed(space, rng, scale)
    return SignedMeasure(space, np.where(split, a.mass, 0.0)), SignedMeasure(space, np.where(split, 0.0, b.mass))


def verify_extension_properties(
    phi: Transfunction,
    config: SamplerConfig | None = None,
    base: PropertyReport | None = None,
) -> ExtensionReport:
    """Test each transfer claim for the signed extension on sampled signed measures.

    A clause is only tested when ``Phi`` itself passed the audit for the
    clause's hypotheses; otherwise it is reported as not tested.
    """
    config = config or SamplerConfig()
    base = base or check_all(phi, config)
    ext = SignedExtension(phi)
    space = phi.domain
    report = ExtensionReport(base.transfunction, config.seed, config.trials, base)
    T, tol, scale = config.trials, config.tol, config.mass_scale

    for stream, (clause, (hyps, transfers)) in enumerate(CLAUSES.items(), start=100):
        ok = all(base.holds(h) for h in hyps)
        expected = "transfers" if transfers else "may_fail"
        if not ok:
            entry = PropertyEntry(clause, NOT_TESTED, 0, tol, note="hypothesis not confirmed for Phi")
        elif clause == "a":
            def sample(t, _s=stream):
                return _singular_signed_pair(space, trial_rng(config.seed, _s, t), scale)

            def gap(m1, m2):
                return max(additivity_gap(ext, m1, m2), subtractivity_gap(ext, m1, m2))

            count, args, g = sweep_pairs(gap, [], sample, T, tol)
            entry = _clause_entry(clause, count, args, g, ("mu1", "mu2"), tol)
        elif clause == "f":
            C = _bound_constant(phi, base, config)
            entry = check_map_property(ext, "bounded", space, config, signed=True, stream=stream, bound=C)
            entry.name = clause
        elif clause == "difference":
            def sample(t, _s=stream):
                r = trial_rng(config.seed, _s, t)
                return random_positive(space, r, scale), random_positive(space, r, scale)

            def gap(m1, m2):
                return tv(ext(m1 - m2) - (apply(phi, m1) - apply(phi, m2)))

            count, args, g = sweep_pairs(gap, [], sample, T, tol)
            entry = _clause_entry(clause, count, args, g, ("mu1", "mu2"), tol)
        elif clause == "antisymmetric":
            def sample(t, _s=stream):
                return (random_signed(space, trial_rng(config.seed, _s, t), scale),)

            count, args, g = sweep_pairs(lambda m: tv(ext(-m) + ext(m)), [], sample, T, tol)
            entry = _clause_entry(clause, count, args, g, ("mu",), tol)
        else:
            entry = check_map_property(
                ext, CLAUSE_PROPERTY[clause], space, config, signed=True, stream=stream
            )
            entry.name = clause
        report.clauses[clause] = ClauseResult(clause, hyps, ok, expected, entry)
    return report


def _clause_entry(name, count, args, gap, names, tol) -> PropertyEntry:
    if args is None:
        return PropertyEntry(name, HOLDS, count, tol, gap=gap)
    return PropertyEntry(name, VIOLATED, count, tol, witness=dict(zip(names, args)), gap=gap)


def _bound_constant(phi, base, config) -> float:
    if phi.rule.linear:
        return operator_norm(phi).value
    return float(base.entries["bounded"].estimate or 0.0)


# -- uniqueness probes --------------------------------------------------------


def shift_candidate(phi: Transfunction, eta: PositiveMeasure) -> Callable[[SignedMeasure], SignedMeasure]:
    """Extension through the non-minimal decomposition ``mu = (mu+ + eta) - (mu- + eta)``."""

    def psi(mu):
        plus, minus = jordan_decompose(as_signed(mu))
        return apply(phi, plus + eta) - apply(phi, minus + eta)

    return psi


def positive_part_candidate(phi: Transfunction) -> Callable[[SignedMeasure], SignedMeasure]:
    """Planted non-extension ``mu -> Phi mu+`` that ignores the negative part."""

    def psi(mu):
        plus, _ = jordan_decompose(as_signed(mu))
        return apply(phi, plus).to_signed()

    return psi


@dataclass
class CandidateResult:
    name: str
    trials: int
    agreements: int
    max_gap: float
    witness: SignedMeasure | None = None

    @property
    def agrees(self) -> bool:
        return self.agreements == self.trials


@dataclass
class UniquenessReport:
    mode: str
    tol: float
    candidates: dict[str, CandidateResult] = field(default_factory=dict)


def uniqueness_probe(
    phi: Transfunction,
    candidates: Mapping[str, Callable],
    config: SamplerConfig | None = None,
    mode: str = "strong",
    tol: float = 1e-12,
    base: PropertyReport | None = None,
) -> UniquenessReport:
    """Compare candidate signed extensions of ``Phi`` with ``Phi mu+ - Phi mu-``.

    ``mode="strong"`` requires ``Phi`` strongly additive, ``mode="weak"``
    requires it weakly additive. A candidate that disagrees with ``Phi`` on
    positive measures is not an extension and raises ``ValueError``.
    """
    config = config or SamplerConfig()
    need = {"strong": "strongly_additive", "weak": "weakly_additive"}[mode]
    if base is None or need not in base.entries:
        from .algebra import check_property

        holds = check_property(phi, need, config).holds
    else:
        holds = base.holds(need)
    if not holds:
        raise ValueError(f"uniqueness probe ({mode}) needs a {need.replace('_', ' ')} transfunction")
    report = UniquenessReport(mode, tol)
    space = phi.domain
    for k, (name, psi) in enumerate(sorted(candidates.items())):
        for t in range(config.trials):
            mu = random_positive(space, trial_rng(config.seed, 300 + k, t), config.mass_scale)
            if tv(as_signed(psi(mu)) - apply(phi, mu)) > max(tol, config.tol):
                raise ValueError(f"candidate {name!r} does not restrict to Phi on positive measures")
        agree, worst, witness = 0, 0.0, None
        for t in range(config.trials):
            mu = random_signed(space, trial_rng(config.seed, 400 + k, t), config.mass_scale)
            g = tv(as_signed(psi(mu)) - extend_signed(phi, mu))
            worst = max(worst, g)
            if g <= tol:
                agree += 1
            elif witness is None:
                witness = mu
        report.candidates[name] = CandidateResult(name, config.trials, agree, worst, witness)
    return report


def uniqueness_probe_strong(phi, candidates, config=None, tol: float = 1e-12, base=None) -> UniquenessReport:
    return uniqueness_probe(phi, candidates, config, "strong", tol, base)


# -- partition approximation --------------------------------------------------


@dataclass
class PartitionApproximation:
    """``mu_i = sum_S alpha[i, S] mu|_S + kappa_i`` with small remainders.

    ``classes[s]`` lists the atoms of class ``s``; ``labels[a]`` is the class
    of atom ``a``. A class whose ``alpha`` column is all zero and whose atoms
    carry no reference mass is the null class, if present.
    """

    measures: list[PositiveMeasure]
    reference: PositiveMeasure
    eps: float
    delta: float
    labels: np.ndarray
    classes: list[np.ndarray]
    alpha: np.ndarray  # shape (n, len(classes))
    remainders: list[PositiveMeasure]
    null_class: int | None = None

    @property
    def remainder_total(self) -> float:
        return float(sum(k.total() for k in self.remainders))

    def class_measure(self, s: int) -> PositiveMeasure:
        return self.reference.restrict(self.classes[s])

    def reconstruct(self, i: int) -> PositiveMeasure:
        mass = self.alpha[i][self.labels] * np.asarray(self.reference.mass) if self.classes else 0.0
        return PositiveMeasure(self.reference.space, mass + np.asarray(self.remainders[i].mass))

    def reconstruction_error(self) -> float:
        """Largest ``|mu_i(B) - reconstruction(B)|`` over all atom-sets ``B`` and all ``i``."""
        worst = 0.0
        for i, mu in enumerate(self.measures):
            diff = np.asarray(self.reconstruct(i).mass) - np.asarray(mu.mass)
            worst = max(worst, float(max(diff[diff > 0].sum(), -diff[diff < 0].sum())))
        return worst


def lemma1_partition(measures: Sequence[PositiveMeasure], eps: float) -> PartitionApproximation:
    """Approximate ``n`` measures by simple multiples of one reference measure on a finite partition.

    The reference is ``mu = sum mu_i``. Each density ``f_i = d mu_i / d mu``
    is floored to a multiple of ``delta = eps / (n mu(X))``, which keeps the
    simple function below ``f_i`` and each remainder below ``eps / n``. The
    partition is the common refinement of the ``n`` floor labelings; atoms
    where ``mu`` vanishes form a separate null class.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    measures = list(measures)
    if not measures:
        raise ValueError("need at least one measure")
    space = measures[0].space
    for m in measures:
        if not m.space.compatible(space):
            raise SpaceMismatchError("all measures must live on one space")
    n = len(measures)
    masses = np.array([np.asarray(m.mass) for m in measures])
    ref = masses.sum(axis=0)
    reference = PositiveMeasure(space, ref)
    total = float(ref.sum())
    if total == 0.0:
        return PartitionApproximation(
            measures, reference, eps, np.inf, np.full(space.count, -1), [], np.zeros((n, 0)),
            [PositiveMeasure.zero(space) for _ in range(n)],
        )
    delta = eps / (n * total)
    live = ref > 0
    dens = np.zeros_like(masses)
    dens[:, live] = masses[:, live] / ref[live]
    bins = np.floor(dens / delta).astype(np.int64)
    # rounding can push a floor one step past the true density
    while True:
        over = (bins * delta) * ref > masses
        if not over.any():
            break
        bins[over] -= 1
    bins[:, ~live] = 0

    keys: dict[tuple, int] = {}
    labels = np.empty(space.count, dtype=np.int64)
    null_key = ("null",)
    for a in range(space.count):
        key = tuple(bins[:, a]) if live[a] else null_key
        labels[a] = keys.setdefault(key, len(keys))
    classes = [np.flatnonzero(labels == s) for s in range(len(keys))]
    alpha = np.zeros((n, len(keys)))
    for key, s in keys.items():
        if key is not null_key:
            alpha[:, s] = np.asarray(key, dtype=float) * delta
    approx = alpha[:, labels] * ref
    remainders = [PositiveMeasure(space, np.maximum(masses[i] - approx[i], 0.0)) for i in range(n)]
    return PartitionApproximation(
        measures, reference, eps, delta, labels, classes, alpha, remainders,
        keys.get(null_key),
    )


# -- series representations ---------------------------------------------------


@dataclass(frozen=True)
class SeriesRepresentation:
    """A finite series ``sum v_n mu_n`` of vectors times positive measures on one space."""

    space: MeasurableSpace
    codomain: BanachSpaceSpec
    terms: tuple[tuple[np.ndarray, PositiveMeasure], ...] = ()

    def __post_init__(self):
        clean = []
        for v, mu in self.terms:
            v = np.array(v, dtype=float).reshape(-1)
            if v.shape != (self.codomain.dimension,):
                raise ValueError(f"term vector must have dimension {self.codomain.dimension}")
            if not mu.space.compatible(self.space):
                raise SpaceMismatchError("all series terms must live on one space")
            v.setflags(write=False)
            clean.append((v, mu))
        object.__setattr__(self, "terms", tuple(clean))

    def __len__(self):
        return len(self.terms)

    def realize(self) -> VectorMeasure:
        return VectorMeasure.from_terms(self.space, self.codomain, self.terms)

    def weight(self) -> float:
        """``sum ||v_n|| ||mu_n||``."""
        return float(sum(self.codomain.norm_of(v) * mu.norm() for v, mu in self.terms))

    def __add__(self, other: "SeriesRepresentation") -> "SeriesRepresentation":
        if not other.space.compatible(self.space) or other.codomain != self.codomain:
            raise SpaceMismatchError("series live on different spaces")
        return SeriesRepresentation(self.space, self.codomain, self.terms + other.terms)

    def scale(self, c: float) -> "SeriesRepresentation":
        return SeriesRepresentation(self.space, self.codomain, tuple((c * v, mu) for v, mu in self.terms))

    def __neg__(self):
        return self.scale(-1.0)


def series_decompose(omega: VectorMeasure, grouping_tolerance: float = 1e-9) -> SeriesRepresentation:
    """Write ``omega`` as ``sum v_n mu_n`` with unit vectors ``v_n`` and ``mu_n = |omega|`` on ``A_n``.

    The per-atom derivative ``omega(a) / |omega|(a)`` is a unit vector.
    Atoms whose derivatives agree (to 12 decimals by default, or within
    ``grouping_tolerance`` in the codomain norm when that is coarser) share a
    group ``A_n``, represented by the renormalized group centroid.
    """
    var = total_variation(omega)
    weights = np.asarray(var.mass)
    live = np.flatnonzero(weights > 0)
    if live.size == 0:
        return SeriesRepresentation(omega.space, omega.codomain, ())
    deriv = np.asarray(omega.values)[live] / weights[live, None]
    groups: list[list[int]] = []
    if grouping_tolerance <= 1e-9:
        index: dict[tuple, int] = {}
        for row, a in zip(np.round(deriv, 12), live):
            key = tuple(row + 0.0)
            if key not in index:
                index[key] = len(groups)
                groups.append([])
            groups[index[key]].append(int(a))
    else:
        leaders: list[np.ndarray] = []
        for row, a in zip(deriv, live):
            for g, lead in enumerate(leaders):
                if omega.codomain.norm_of(row - lead) < grouping_tolerance:
                    groups[g].append(int(a))
                    break
            else:
                leaders.append(row)
                groups.append([int(a)])
    terms = []
    for members in groups:
        d = np.asarray(omega.values)[members] / weights[members, None]
        centroid = d.mean(axis=0)
        v = centroid / omega.codomain.norm_of(centroid)
        terms.append((v, var.restrict(members)))
    return SeriesRepresentation(omega.space, omega.codomain, tuple(terms))


def atomic_series(omega: VectorMeasure) -> SeriesRepresentation:
    """The trivial representation ``sum_a omega(a) delta_a``."""
    terms = tuple(
        (np.asarray(omega.values)[a], PositiveMeasure.dirac(omega.space, a))
        for a in range(omega.space.count)
        if np.any(np.asarray(omega.values)[a] != 0)
    )
    return SeriesRepresentation(omega.space, omega.codomain, terms)


# -- vector extension ---------------------------------------------------------

VECTOR_HYPOTHESES = ("bounded", "strongly_additive", "homogeneous")


class HypothesisError(ValueError):
    def __init__(self, failed: Sequence[str], report: PropertyReport | None = None):
        super().__init__(f"transfunction fails required properties: {', '.join(failed)}")
        self.failed = list(failed)
        self.report = report


class VectorExtension:
    """The linear extension ``sum v_n mu_n -> sum v_n Phi mu_n``.

    Construction audits ``Phi`` for boundedness, strong additivity and
    homogeneity and refuses if any fails.
    """

    def __init__(self, phi: Transfunction, config: SamplerConfig | None = None, report: PropertyReport | None = None):
        config = config or SamplerConfig()
        if report is None:
            report = check_all(phi, config, VECTOR_HYPOTHESES)
        failed = [p for p in VECTOR_HYPOTHESES if not report.holds(p)]
        if failed:
            raise HypothesisError(failed, report)
        self.phi = phi
        self.report = report

    def __call__(self, rep: SeriesRepresentation) -> VectorMeasure:
        if not rep.space.compatible(self.phi.domain):
            raise SpaceMismatchError(f"series lives on {rep.space!r}, transfunction expects {self.phi.domain!r}")
        images = [(v, apply(self.phi, mu)) for v, mu in rep.terms]
        return VectorMeasure.from_terms(self.phi.codomain, rep.codomain, images)


def extend_vector(
    phi: Transfunction,
    rep: SeriesRepresentation,
    config: SamplerConfig | None = None,
    report: PropertyReport | None = None,
) -> VectorMeasure:
    return VectorExtension(phi, config, report)(rep)


@dataclass
class BoundCertificate:
    """Numbers behind ``||sum v_i Phi mu_i|| <= ||Phi|| ||sum v_i mu_i||`` for one family."""

    lhs: float
    rhs: float
    phi_norm: float
    eps: float
    inner_eps: float
    main_term: float
    remainder_source: float
    remainder_image: float
    approximation: PartitionApproximation

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + NORM_TOL

    @property
    def chain_holds(self) -> bool:
        """Both intermediate estimates of the argument are met by the computed numbers."""
        half = self.eps / 2
        return (
            self.remainder_source < half
            and self.remainder_image < half
            and self.lhs <= self.phi_norm * self.main_term + half + NORM_TOL
            and self.rhs / max(self.phi_norm, 1e-300) >= self.main_term - half - NORM_TOL
        )


def bound_certificate(phi: Transfunction, rep: SeriesRepresentation, eps: float = 1e-3) -> BoundCertificate:
    """Check the norm bound for the extension through an explicit partition approximation."""
    norm = operator_norm(phi)
    if norm.method != "exact":
        raise ValueError("bound certificate needs an exact operator norm")
    vs = [v for v, _ in rep.terms]
    mus = [mu for _, mu in rep.terms]
    vsum = float(sum(rep.codomain.norm_of(v) for v in vs))
    inner = eps / (2 * max(1.0, vsum) * max(1.0, norm.value))
    approx = lemma1_partition(mus, inner)
    cod = rep.codomain
    src = VectorMeasure.from_terms(rep.space, cod, zip(vs, approx.remainders)).norm()
    img = VectorMeasure.from_terms(phi.codomain, cod, [(v, apply(phi, k)) for v, k in zip(vs, approx.remainders)]).norm()
    main = 0.0
    for s in range(len(approx.classes)):
        combo = sum(approx.alpha[i, s] * vs[i] for i in range(len(vs)))
        main += float(cod.norm_of(combo)) * approx.class_measure(s).norm()
    lhs = extend_vector(phi, rep, report=_trusted_report(phi)).norm()
    rhs = norm.value * rep.realize().norm()
    return BoundCertificate(lhs, rhs, norm.value, eps, inner, main, src, img, approx)


def _trusted_report(phi: Transfunction) -> PropertyReport:
    """Hypothesis report for rules whose linearity is structural."""
    if not phi.rule.linear:
        return check_all(phi, SamplerConfig(), VECTOR_HYPOTHESES)
    report = PropertyReport(phi.name or phi.rule.type, 0, 0, NORM_TOL, ())
    for p in VECTOR_HYPOTHESES:
        report.entries[p] = PropertyEntry(p, HOLDS, 0, NORM_TOL, basis="structural")
    return report


# -- the norm-preservation counterexample --------------------------------------


@dataclass
class Counterexample:
    phi: Transfunction
    mu: SignedMeasure
    image: SignedMeasure
    mu_norm: float
    image_norm: float
    positive_norm_preserving: bool


def norm_preservation_counterexample(cells: int = 4) -> Counterexample:
    """Uniform spread keeps the mass of positive measures but kills ``delta_0 - delta_1``."""
    space = MeasurableSpace.grid(cells)
    phi = Transfunction(space, space, UniformSpread(), frozenset({"norm_preserving"}), "uniform_spread")
    mu = PositiveMeasure.dirac(space, 0) - PositiveMeasure.dirac(space, 1)
    image = extend_signed(phi, mu)
    positive_ok = all(
        abs(tv(apply(phi, PositiveMeasure.dirac(space, a))) - 1.0) <= NORM_TOL for a in range(cells)
    )
    return Counterexample(phi, mu, image, mu.norm(), image.norm(), positive_ok)


def pushforward_image_norm(mapping: Iterable[int], cells: int = 4) -> float:
    """``||Phi_f~ (delta_0 - delta_1)||`` for an atom map on a grid."""
    space = MeasurableSpace.grid(cells)
    phi = Transfunction(space, space, Pushforward(tuple(mapping)))
    mu = PositiveMeasure.dirac(space, 0) - PositiveMeasure.dirac(space, 1)
    return extend_signed(phi, mu).norm()
