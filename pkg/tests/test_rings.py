import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from transfunctions import (
    BanachSpaceSpec,
    MeasurableSpace,
    RingSetFunction,
    SignedRepresentation,
    empty_representation_check,
    extend_set_function,
    represent,
    ring_closure,
    validate_additivity,
)
from transfunctions.rings import (
    enumerate_representations,
    from_mask,
    random_empty_representation,
    ring_variation,
    to_mask,
)


def naive_closure(n, generators):
    """Pairwise union/difference closure until nothing new appears."""
    fam = {0} | {to_mask(g) for g in generators}
    while True:
        new = {a | b for a in fam for b in fam} | {a & ~b for a in fam for b in fam}
        if new <= fam:
            return frozenset(fam)
        fam |= new


ground_and_generators = st.integers(1, 6).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.sets(st.integers(0, n - 1)), max_size=4))
)


def test_closure_examples():
    X = MeasurableSpace.atomic(3)
    assert len(ring_closure(X, [[0, 1], [1, 2]]).members) == 8
    assert ring_closure(X, []).members == frozenset({0})
    assert ring_closure(X, [[0, 2]]).members == frozenset({0, 0b101})


def test_closure_limits():
    with pytest.raises(ValueError):
        ring_closure(MeasurableSpace.atomic(17), [[0]])
    with pytest.raises(ValueError):
        ring_closure(MeasurableSpace.grid(4), [[0]])
    with pytest.raises(IndexError):
        ring_closure(MeasurableSpace.atomic(3), [[5]])


@given(ground_and_generators)
def test_closure_matches_pairwise_oracle_and_is_closed(case):
    n, gens = case
    ring = ring_closure(MeasurableSpace.atomic(n), [sorted(g) for g in gens])
    assert ring.members == naive_closure(n, gens)
    for a in ring.members:
        for b in ring.members:
            assert a | b in ring.members and a & ~b in ring.members


@given(ground_and_generators)
def test_closure_idempotent(case):
    n, gens = case
    X = MeasurableSpace.atomic(n)
    ring = ring_closure(X, [sorted(g) for g in gens])
    again = ring_closure(X, [from_mask(m) for m in ring.members])
    assert again.members == ring.members


def test_validate_additivity_examples():
    X = MeasurableSpace.atomic(2)
    ring = ring_closure(X, [[0], [1]])
    f = RingSetFunction.induced(ring, [1.0, 2.0])
    assert validate_additivity(f) == []
    bad = RingSetFunction(ring, BanachSpaceSpec(1), {0: [0], 0b01: [1], 0b10: [2], 0b11: [4]})
    violations = validate_additivity(bad)
    assert len(violations) == 1
    assert (violations[0].left, violations[0].right) == ((0,), (1,))
    assert violations[0].gap == pytest.approx(1.0)


def test_validate_additivity_random_sweep(rng):
    for _ in range(100):
        n = int(rng.integers(1, 7))
        gens = [list(np.flatnonzero(rng.random(n) < 0.5)) for _ in range(int(rng.integers(0, 4)))]
        ring = ring_closure(MeasurableSpace.atomic(n), gens)
        f = RingSetFunction.induced(ring, rng.normal(size=(n, 2)), BanachSpaceSpec(2))
        assert validate_additivity(f) == []


def test_incomplete_assignment_rejected():
    ring = ring_closure(MeasurableSpace.atomic(2), [[0], [1]])
    with pytest.raises(ValueError):
        RingSetFunction(ring, BanachSpaceSpec(1), {0: [0], 1: [1]})


def test_represent_examples():
    X = MeasurableSpace.atomic(2)
    ring = ring_closure(X, [[0, 1], [1]])
    assert represent([0], ring).terms == ((1, 0b01),)
    rep = represent([0], ring, family=ring.generators)
    assert rep.as_lists() == [(1, [0, 1]), (-1, [1])]
    assert rep.represents(0b01, 2)
    assert represent([], ring).terms == ()


def test_represent_not_found_for_non_members():
    ring = ring_closure(MeasurableSpace.atomic(3), [[0, 1], [2]])
    assert represent([0], ring, max_terms=8) is None
    assert list(enumerate_representations(0b001, ring, max_terms=4)) == []


def test_extension_is_representation_independent():
    X = MeasurableSpace.atomic(4)
    ring = ring_closure(X, [[0, 1], [1, 2], [3]])
    f = RingSetFunction.induced(ring, [1.5, -2.0, 0.25, 4.0])
    for target in ring.sorted_members():
        values = [extend_set_function(f, r) for r in enumerate_representations(target, ring, max_terms=3)]
        assert values
        for v in values:
            np.testing.assert_allclose(v, f(target), atol=1e-12)


def test_extension_examples():
    X = MeasurableSpace.atomic(2)
    ring = ring_closure(X, [[0], [1]])
    f = RingSetFunction.induced(ring, [3.0, 5.0])
    assert extend_set_function(f, SignedRepresentation(((1, 0b01),)))[0] == 3.0
    null = SignedRepresentation(((1, 0b11), (-1, 0b01), (-1, 0b10)))
    assert extend_set_function(f, null)[0] == 0.0
    with pytest.raises(ValueError):
        extend_set_function(f, SignedRepresentation(((1, 0b11),)), target=0b01)


def test_empty_representation_examples():
    X = MeasurableSpace.atomic(2)
    ring = ring_closure(X, [[0], [1]])
    f = RingSetFunction.induced(ring, [3.0, 5.0])
    for terms in [((1, 0b01), (-1, 0b01)), ((1, 0b11), (-1, 0b01), (-1, 0b10))]:
        rep = SignedRepresentation(terms)
        assert rep.represents(0, 2)
        assert extend_set_function(f, rep)[0] == 0.0


def test_random_empty_representations_are_valid(rng):
    ring = ring_closure(MeasurableSpace.atomic(5), [[0, 1, 2], [2, 3], [4]])
    found = 0
    for _ in range(100):
        rep = random_empty_representation(ring, rng)
        if rep is None:  # candidate exceeded the term bound
            continue
        found += 1
        assert len(rep.terms) <= 8
        assert rep.represents(0, 5)
        assert all(a in ring.members for _, a in rep.terms)
    assert found >= 50


def test_empty_representation_check_detects_non_additive():
    ring = ring_closure(MeasurableSpace.atomic(2), [[0], [1]])
    good = RingSetFunction.induced(ring, [1.0, 2.0])
    report = empty_representation_check(good, trials=50, seed=3)
    assert report.passed and len(report.tested) == 50
    bad = RingSetFunction(ring, BanachSpaceSpec(1), {0: [0], 0b01: [1], 0b10: [2], 0b11: [4]})
    assert not empty_representation_check(bad, trials=50, seed=3).passed


def test_ring_variation_monotone_and_additive(rng):
    ring = ring_closure(MeasurableSpace.atomic(5), [[0, 1], [1, 2, 3], [4]])
    f = RingSetFunction.induced(ring, rng.normal(size=(5, 2)), BanachSpaceSpec(2, "L1"))
    var = ring_variation(f)
    for a, b in itertools.product(ring.members, repeat=2):
        if a & b == 0:
            assert var[a | b] == pytest.approx(var[a] + var[b], abs=1e-12)
        if a & ~b == 0:
            assert var[a] <= var[b] + 1e-12
        assert f.codomain.norm_of(f(a)) <= var[a] + 1e-12
