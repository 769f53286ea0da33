import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vgmmot import (
    MixtureModel,
    gaussian_interpolate,
    gmm_distance,
    gmm_interpolate,
    unbalanced_gmm_distance,
    unbalanced_gmm_interpolate,
    w2_gaussian,
)
from vgmmot.errors import DimensionMismatchError, UnbalancedInputError, ZeroMassError
from vgmmot.oracle import Grid1D, w2_1d_quantile

from helpers import g1, rand_gmm


def _two_bumps(a, b):
    return MixtureModel([a, b], [g1(0), g1(10)])


def test_two_bump_example():
    r = gmm_distance(_two_bumps(0.6, 0.4), _two_bumps(0.3, 0.7))
    np.testing.assert_allclose(r.cost, [[0, 100], [100, 0]], atol=1e-12)
    assert r.distance**2 == pytest.approx(30.0, abs=1e-9)
    np.testing.assert_allclose(r.plan.entries, [[0.3, 0.3], [0.0, 0.4]], atol=1e-12)
    mid = gmm_interpolate(_two_bumps(0.6, 0.4), _two_bumps(0.3, 0.7), 0.5, result=r)
    assert sorted(mid.weights.round(12).tolist()) == [0.3, 0.3, 0.4]
    assert mid.mass == pytest.approx(1.0, abs=1e-12)


def test_self_distance_zero():
    mu = rand_gmm(np.random.default_rng(0), 2, 4)
    r = gmm_distance(mu, mu)
    assert r.distance == 0.0
    assert np.all(r.plan.entries[~np.eye(4, dtype=bool)] == 0)


def test_single_gaussians():
    a, b = g1(1, 2), g1(-2, 0.5)
    r = gmm_distance(MixtureModel([1.0], [a]), MixtureModel([1.0], [b]))
    assert r.distance == pytest.approx(w2_gaussian(a, b), abs=1e-12)
    mid = gmm_interpolate(MixtureModel([1.0], [a]), MixtureModel([1.0], [b]), 0.5)
    assert len(mid) == 1 and mid.gaussians[0].isclose(gaussian_interpolate(a, b, 0.5))


def test_interpolation_endpoints_are_inputs_as_distributions():
    rng = np.random.default_rng(2)
    mu0, mu1 = rand_gmm(rng, 2, 3), rand_gmm(rng, 2, 2)
    assert gmm_interpolate(mu0, mu1, 0).same_distribution(mu0)
    assert gmm_interpolate(mu0, mu1, 1).same_distribution(mu1)
    x = rng.normal(size=(20, 2))
    np.testing.assert_allclose(gmm_interpolate(mu0, mu1, 0).pdf(x), mu0.pdf(x), rtol=1e-10)


def test_upper_bounds_true_w2_in_1d():
    rng = np.random.default_rng(4)
    for _ in range(5):
        mu0, mu1 = rand_gmm(rng, 1, 3), rand_gmm(rng, 1, 2)
        lo = min(g.mean[0] - 8 * np.sqrt(g.cov[0, 0]) for g in mu0.gaussians + mu1.gaussians)
        hi = max(g.mean[0] + 8 * np.sqrt(g.cov[0, 0]) for g in mu0.gaussians + mu1.gaussians)
        f0 = Grid1D.from_density(lambda x: mu0.pdf(x[:, None]), lo, hi, 4000)
        f1 = Grid1D.from_density(lambda x: mu1.pdf(x[:, None]), lo, hi, 4000)
        assert gmm_distance(mu0, mu1).distance >= w2_1d_quantile(f0, f1) * (1 - 1e-3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_mass_conserved_along_geodesic(seed):
    rng = np.random.default_rng(seed)
    mu0, mu1 = rand_gmm(rng, 2, 3), rand_gmm(rng, 2, 4)
    r = gmm_distance(mu0, mu1)
    for t in (0.1, 0.5, 0.9):
        assert abs(gmm_interpolate(mu0, mu1, t, result=r).mass - 1.0) <= 1e-12


def test_unbalanced_input_rejected_with_hint():
    with pytest.raises(UnbalancedInputError, match="unbalanced_gmm_distance"):
        gmm_distance(MixtureModel([1.0], [g1(0)]), MixtureModel([0.6], [g1(0)]))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        gmm_distance(MixtureModel([1.0], [g1(0)]), rand_gmm(np.random.default_rng(0), 2, 1))


@pytest.mark.parametrize("m0, m1", [(1.0, 0.6), (0.6, 1.0)])
def test_unbalanced_forced_coupling(m0, m1):
    r = unbalanced_gmm_distance(MixtureModel([m0], [g1(0)]), MixtureModel([m1], [g1(0)]), 2.0)
    assert r.distance**2 == pytest.approx(0.8, abs=1e-12)
    assert r.source_side == ("target" if m0 > m1 else "start")
    assert sorted(r.plan.entries.ravel().round(12).tolist()) == [0.4, 0.6]


def test_unbalanced_equal_mass_matches_balanced():
    rng = np.random.default_rng(5)
    mu0, mu1 = rand_gmm(rng, 2, 3), rand_gmm(rng, 2, 2)
    r = unbalanced_gmm_distance(mu0, mu1, 3.0)
    assert r.source_side is None
    assert r.distance == pytest.approx(gmm_distance(mu0, mu1).distance, abs=1e-12)
    orig, src = unbalanced_gmm_interpolate(mu0, mu1, 3.0, 0.5, result=r)
    assert len(src) == 0 and orig.mass == pytest.approx(1.0)


def test_unbalanced_interpolation_bookkeeping():
    mu0, mu1 = MixtureModel([1.0], [g1(0)]), MixtureModel([0.6], [g1(0)])
    for t, expect in [(0.0, 1.0), (0.5, 0.8), (1.0, 0.6)]:
        orig, src = unbalanced_gmm_interpolate(mu0, mu1, 2.0, t)
        assert orig.mass == pytest.approx(expect, abs=1e-12)
        assert orig.mass + src.mass == pytest.approx(1.0, abs=1e-12)


def test_unbalanced_zero_mass_rejected():
    with pytest.raises(ZeroMassError):
        unbalanced_gmm_distance(MixtureModel([], [], dim=1), MixtureModel([1.0], [g1(0)]), 1.0)
