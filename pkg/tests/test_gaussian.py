import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vgmmot import Gaussian, gaussian_interpolate, w2_gaussian, w2_squared
from vgmmot.errors import DimensionMismatchError, ModelValidationError
from vgmmot.gaussian import density

from helpers import g1, rand_gaussian


def test_1d_closed_form():
    # W2^2 = (m0 - m1)^2 + (s0 - s1)^2 in one dimension
    assert w2_squared(g1(0, 1), g1(3, 4)) == pytest.approx(9 + 1, abs=1e-12)


def test_commuting_covariances():
    a = Gaussian([0, 0], np.diag([1.0, 4.0]))
    b = Gaussian([1, 1], np.diag([9.0, 1.0]))
    assert w2_squared(a, b) == pytest.approx(2 + (1 - 3) ** 2 + (2 - 1) ** 2, abs=1e-12)


def test_identical_gaussians_distance_exactly_zero():
    rng = np.random.default_rng(0)
    g = rand_gaussian(rng, 3)
    h = Gaussian(g.mean.copy(), g.cov.copy())
    assert w2_gaussian(g, g) == 0.0
    assert w2_gaussian(g, h) == 0.0


def test_pure_translation():
    g = rand_gaussian(np.random.default_rng(1), 2)
    h = Gaussian(g.mean + [3.0, 4.0], g.cov)
    assert w2_gaussian(g, h) == pytest.approx(5.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_w2_symmetric_and_triangle(seed, dim):
    rng = np.random.default_rng(seed)
    a, b, c = (rand_gaussian(rng, dim) for _ in range(3))
    assert abs(w2_gaussian(a, b) - w2_gaussian(b, a)) <= 1e-9
    assert w2_gaussian(a, c) <= w2_gaussian(a, b) + w2_gaussian(b, c) + 1e-7


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3), st.floats(0, 1), st.floats(0, 1))
def test_geodesic_constant_speed(seed, dim, s, t):
    rng = np.random.default_rng(seed)
    a, b = rand_gaussian(rng, dim), rand_gaussian(rng, dim)
    d = w2_gaussian(a, b)
    gs, gt = gaussian_interpolate(a, b, s), gaussian_interpolate(a, b, t)
    assert w2_gaussian(gs, gt) == pytest.approx(abs(t - s) * d, abs=1e-6)


def test_interpolation_endpoints_and_midpoint():
    a, b = g1(0, 1), g1(4, 9)
    assert gaussian_interpolate(a, b, 0) is a
    assert gaussian_interpolate(a, b, 1) is b
    m = gaussian_interpolate(a, b, 0.5)
    assert m.mean[0] == pytest.approx(2.0)
    assert m.cov[0, 0] == pytest.approx(4.0)  # std goes 1 -> 3 linearly
    with pytest.raises(ValueError):
        gaussian_interpolate(a, b, 1.5)


def test_density_matches_formula():
    g = Gaussian([1.0, -1.0], [[2.0, 0.5], [0.5, 1.0]])
    x = np.array([0.3, 0.2])
    d = x - g.mean
    expect = np.exp(-0.5 * d @ np.linalg.solve(g.cov, d)) / (2 * np.pi * np.sqrt(np.linalg.det(g.cov)))
    assert density(g, x) == pytest.approx(expect, rel=1e-12)
    assert g.pdf(np.stack([x, x])).shape == (2,)


def test_validation():
    with pytest.raises(DimensionMismatchError):
        Gaussian([0, 0], [[1.0]])
    with pytest.raises(ModelValidationError):
        Gaussian([0], [[0.0]])
    with pytest.raises(ModelValidationError):
        Gaussian([0, 0], [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(DimensionMismatchError):
        w2_squared(g1(0), Gaussian([0, 0], np.eye(2)))


def test_immutable_and_hashable():
    g = g1(0, 2)
    with pytest.raises((AttributeError, ValueError)):
        g.mean[0] = 1.0
    with pytest.raises(AttributeError):
        g.mean = np.zeros(1)
    assert g == g1(0, 2) and hash(g) == hash(g1(0, 2))
