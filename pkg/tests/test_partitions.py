import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cbimatrix import Partition, enumerate_partitions, ghc, make_rng, zonal_C, zonal_at_identity
from cbimatrix.partitions import (
    hook_lengths,
    num_standard_tableaux,
    parse_partition,
    partition_table,
    schur,
    schur_bialternant,
    schur_jacobi_trudi,
    schur_table,
)


def test_partition_validation():
    assert Partition((3, 1, 0)) == (3, 1)
    assert Partition((3, 2, 1)).conjugate() == (3, 2, 1)
    assert Partition((4, 1)).conjugate() == (2, 1, 1, 1)
    with pytest.raises(ValueError):
        Partition((1, 2))
    assert parse_partition("(2, 1)") == (2, 1)
    assert parse_partition("") == ()


def test_counts():
    # p(8) = 22; partitions of 8 with at most 2 parts: 5
    assert len(enumerate_partitions(8, 8)) == 22
    assert len(enumerate_partitions(8, 2)) == 5
    assert enumerate_partitions(0, 3) == [()]


def test_hooks_and_tableaux():
    assert sorted(hook_lengths((2, 1))) == [1, 1, 3]
    assert num_standard_tableaux((3, 2)) == 5
    assert sum(num_standard_tableaux(tuple(t)) ** 2 for t in enumerate_partitions(6, 6)) == math.factorial(6)


def test_ghc_small_cases():
    a = 2.5
    assert ghc(a, ()) == 1.0
    assert ghc(a, (3,)) == pytest.approx(a * (a + 1) * (a + 2))
    assert ghc(a, (2, 1)) == pytest.approx(a * (a + 1) * (a - 1))
    assert ghc(a, (1, 1, 1)) == pytest.approx(a * (a - 1) * (a - 2))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 6.0), st.integers(1, 3), st.integers(0, 6))
def test_ghc_recursion(a, m, t):
    # [a]_tau = prod_j (a - j + 1)_{tau_j}: peeling one box off row j
    for tau in enumerate_partitions(t, m):
        for j, part in enumerate(tau):
            smaller = list(tau)
            smaller[j] -= 1
            if j + 1 < len(tau) and smaller[j] < tau[j + 1]:
                continue
            expect = ghc(a, Partition(smaller)) * (a - j + part - 1)
            assert ghc(a, tau) == pytest.approx(expect, rel=1e-12, abs=1e-12)


def test_zonal_examples():
    assert zonal_C((2,), [1.0, 1.0]) == pytest.approx(3.0)
    assert zonal_C((1, 1), [1.0, 1.0]) == pytest.approx(1.0)
    # C_(2,1)(x) = 2 s_(2,1)(x); s_(2,1)(x1,x2) = x1 x2 (x1 + x2)
    assert zonal_C((2, 1), [0.3, 0.5]) == pytest.approx(2 * 0.15 * 0.8)
    assert zonal_C((1, 1, 1), [0.3, 0.5]) == 0.0
    assert zonal_at_identity((2, 1), 3) == pytest.approx(zonal_C((2, 1), np.ones(3)))
    assert zonal_at_identity((1, 1, 1), 2) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 8), st.integers(0, 1000))
def test_zonal_sum_identity(m, t, seed):
    x = make_rng(seed).uniform(0, 1, m)
    total = sum(zonal_C(tau, x) for tau in enumerate_partitions(t, m))
    assert total == pytest.approx(x.sum() ** t, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 6), st.floats(0.1, 3.0), st.integers(0, 1000))
def test_homogeneity(m, t, scale, seed):
    x = make_rng(seed).uniform(0.05, 1, m)
    for tau in enumerate_partitions(t, m):
        assert zonal_C(tau, scale * x) == pytest.approx(scale ** t * zonal_C(tau, x), rel=1e-10)


def test_schur_evaluators_agree():
    rng = make_rng(9)
    x = rng.uniform(0.1, 0.9, 3)
    parts, _ = partition_table(12, 3)[:2]
    jt = schur_jacobi_trudi(parts, x[None, :])[0]
    ba = schur_bialternant(parts, x[None, :])[0]
    table = schur_table(x[None, :], 12)[0]
    assert np.allclose(jt, ba, rtol=1e-9)
    assert np.allclose(table, jt, rtol=1e-10)


def test_schur_with_zero_eigenvalue():
    assert schur((2, 1), [0.5, 0.0]) == 0.0
    assert schur((2,), [0.5, 0.0]) == pytest.approx(0.25)
