import numpy as np
import pytest

from cbimatrix import MCEstimate, make_rng
from cbimatrix.mc import chisquare_pvalue, ks_pvalue
from cbimatrix.rng import SEED_ENV, default_seed, shard_sizes


def test_streams_reproduce_and_differ():
    a = make_rng(11).standard_normal(5)
    assert np.array_equal(a, make_rng(11).standard_normal(5))
    assert not np.array_equal(a, make_rng(11, 1).standard_normal(5))
    assert not np.array_equal(a, make_rng(12).standard_normal(5))


def test_default_seed_env(monkeypatch):
    monkeypatch.setenv(SEED_ENV, "123")
    assert default_seed() == 123
    monkeypatch.delenv(SEED_ENV)
    assert default_seed() == 42


def test_shard_sizes():
    assert shard_sizes(10, 3) == [4, 3, 3]
    assert sum(shard_sizes(7, 7)) == 7
    with pytest.raises(ValueError):
        shard_sizes(5, 0)


def test_estimates():
    est = MCEstimate.from_values([1.0, 2.0, 3.0], seed=0)
    assert est.mean == 2.0
    assert est.std_error == pytest.approx(1 / np.sqrt(3))
    p = MCEstimate.from_proportion(25, 100, seed=0)
    assert p.std_error == pytest.approx(np.sqrt(0.25 * 0.75 / 100))
    assert p.z_score(0.25) == 0.0
    assert MCEstimate(1.0, 0.0, 1, 0).z_score(2.0) == float("inf")
    assert "diagnostics" in p.to_dict()


def test_gof_helpers():
    x = make_rng(4).uniform(size=2000)
    assert ks_pvalue(x, lambda t: np.clip(t, 0, 1)) > 0.01
    assert chisquare_pvalue([25, 25, 50], [1, 1, 2]) == pytest.approx(1.0)
