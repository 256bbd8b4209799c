import numpy as np
import pytest

from brownian_lab.exceptions import BadSplit, DimensionMismatch, EmptySample
from brownian_lab.gaussian import GaussianMeasure, sample
from brownian_lab.stats import (
    check_probes,
    default_probes,
    ecf,
    ecf_gaussian_test,
    empirical_cov,
    gaussian_cov_independence_test,
    independence_ecf_test,
)


def test_ecf_direct_sum():
    x = np.array([[0.0], [1.0], [2.0]])
    expect = np.mean(np.exp(1j * 0.7 * x[:, 0]))
    assert ecf(x, 0.7) == pytest.approx(expect, abs=1e-15)
    # chunking does not change the answer
    big = np.random.default_rng(0).normal(size=(200_000, 1))
    assert ecf(big, 1.0) == pytest.approx(np.mean(np.exp(1j * big[:, 0])), abs=1e-12)


def test_ecf_errors():
    with pytest.raises(EmptySample):
        ecf(np.zeros((0, 2)), [1, 1])
    with pytest.raises(DimensionMismatch):
        ecf(np.zeros((3, 2)), [1, 1, 1])


def test_default_probes():
    p = default_probes(3)
    assert p.shape == (6, 3)
    assert np.linalg.norm(p[-1]) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        check_probes([[11.0]], 1)


def test_ecf_gaussian_test_detects_wrong_variance():
    g = GaussianMeasure.standard(1)
    x = sample(GaussianMeasure.centered([[1.5]]), 2, 20_000)
    assert not ecf_gaussian_test(x, g).passed
    assert ecf_gaussian_test(sample(g, 2, 20_000), g).passed


def test_empirical_cov_matches_numpy():
    x = np.random.default_rng(3).normal(size=(50, 3))
    assert np.allclose(empirical_cov(x), np.cov(x, rowvar=False))
    with pytest.raises(EmptySample):
        empirical_cov(np.zeros((1, 2)))


def test_independence_ecf_on_independent_pairs():
    x = sample(GaussianMeasure.standard(2), 5, 40_000)
    assert independence_ecf_test(x[:, :1], x[:, 1:]).passed


def test_independence_ecf_identical_gap():
    # joint ecf at (1,1) of (X, X) is exp(-2), product is exp(-1)
    x = sample(GaussianMeasure.standard(1), 6, 200_000)
    rep = independence_ecf_test(x, x, probes_x=[[1.0]], probes_y=[[1.0]])
    assert not rep.passed
    assert rep.estimate == pytest.approx(np.exp(-1) - np.exp(-2), abs=0.01)


def test_independence_ecf_requires_pairs():
    with pytest.raises(DimensionMismatch):
        independence_ecf_test(np.zeros((3, 1)), np.zeros((4, 1)))


def test_cov_independence():
    C = np.array([[1.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 1.0]])
    x = sample(GaussianMeasure.centered(C), 7, 20_000)
    assert gaussian_cov_independence_test(x, ([0, 1], [2])).passed
    assert not gaussian_cov_independence_test(x, ([0], [1, 2])).passed


@pytest.mark.parametrize("split", [([], [1]), ([0, 1], [1]), ([0], [5])])
def test_bad_splits(split):
    with pytest.raises(BadSplit):
        gaussian_cov_independence_test(np.zeros((5, 3)), split)
