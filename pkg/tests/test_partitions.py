import math

import pytest
from hypothesis import given

from conftest import random_vector_measure, vector_measures
from transfunctions import BanachSpaceSpec, MeasurableSpace, VectorMeasure, total_variation, total_variation_oracle
from transfunctions.partitions import (
    MAX_ORACLE_ATOMS,
    partition_supremum,
    set_partitions,
    subset_norm_table,
    variation_oracle_table,
)

BELL = [1, 1, 2, 5, 15, 52, 203, 877]


@pytest.mark.parametrize("n", range(len(BELL)))
def test_partition_counts_are_bell_numbers(n):
    parts = list(set_partitions(list(range(n))))
    assert len(parts) == BELL[n]
    canon = {tuple(sorted(tuple(sorted(b)) for b in p)) for p in parts}
    assert len(canon) == BELL[n]
    for p in parts:
        assert sorted(x for b in p for x in b) == list(range(n))


def test_oracle_two_atom_example():
    omega = VectorMeasure(MeasurableSpace.atomic(2), BanachSpaceSpec(2, "L2"), [[3, 4], [-3, 4]])
    assert total_variation_oracle(omega, [0, 1]) == 10
    assert total_variation_oracle(omega, []) == 0


def test_oracle_refuses_large_sets():
    omega = VectorMeasure.zero(MeasurableSpace.atomic(MAX_ORACLE_ATOMS + 1), BanachSpaceSpec(1))
    with pytest.raises(ValueError):
        total_variation_oracle(omega, range(MAX_ORACLE_ATOMS + 1))


def test_subset_norm_table_indexing():
    omega = VectorMeasure(MeasurableSpace.atomic(3), BanachSpaceSpec(1), [[1], [-2], [4]])
    table = subset_norm_table(omega, [0, 1, 2])
    assert table[0] == 0
    assert table[0b011] == 1
    assert table[0b111] == 3


def test_memoized_supremum_matches_enumeration(rng):
    for _ in range(20):
        omega = random_vector_measure(rng, 6, 2, "Linf")
        atoms = list(range(6))
        table = subset_norm_table(omega, atoms)
        memo = partition_supremum(lambda m: table[m], (1 << 6) - 1)
        brute = max(
            sum(omega.codomain.norm_of(omega.of(b)) for b in blocks) for blocks in set_partitions(atoms)
        )
        assert memo[(1 << 6) - 1] == pytest.approx(brute, abs=1e-12)


def test_random_five_atom_oracle_agrees(rng):
    for norm in ("L1", "L2", "Linf"):
        omega = random_vector_measure(rng, 5, 3, norm)
        var = total_variation(omega)
        table = variation_oracle_table(omega)
        assert len(table) == 32
        for subset, value in table.items():
            assert abs(value - var.of(sorted(subset))) <= 1e-12


@given(vector_measures(max_atoms=5))
def test_oracle_equivalence_property(omega):
    var = total_variation(omega)
    for subset, value in variation_oracle_table(omega).items():
        assert math.isclose(value, var.of(sorted(subset)), rel_tol=1e-12, abs_tol=1e-12)
