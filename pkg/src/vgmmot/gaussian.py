"""Gaussians: closed-form W2 distance, displacement interpolation, density."""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .errors import DimensionMismatchError, ModelValidationError
from .linalg import as_symmetric, psd_inv_sqrt, psd_sqrt, sym_eig

EQUAL_ATOL = 1e-9


class Gaussian:
    """Immutable normal distribution N(mean, cov) with SPD covariance."""

    def __init__(self, mean, cov):
        m = np.array(mean, dtype=float).reshape(-1)
        C = np.array(cov, dtype=float)
        if C.ndim == 0:
            C = C.reshape(1, 1)
        if C.shape != (m.size, m.size):
            raise DimensionMismatchError(f"mean has length {m.size} but covariance has shape {C.shape}")
        if not np.all(np.isfinite(m)):
            raise ModelValidationError("mean has non-finite entries")
        C = as_symmetric(C)
        lam, _ = sym_eig(C)
        if lam[-1] <= 0.0:
            raise ModelValidationError(f"covariance is not positive definite (min eigenvalue {lam[-1]:.6e})")
        m.setflags(write=False)
        C.setflags(write=False)
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "cov", C)

    def __setattr__(self, name, value):
        raise AttributeError("Gaussian is immutable")

    @property
    def dim(self) -> int:
        return self.mean.size

    @cached_property
    def cov_sqrt(self) -> np.ndarray:
        return psd_sqrt(self.cov)

    @cached_property
    def cov_inv_sqrt(self) -> np.ndarray:
        return psd_inv_sqrt(self.cov)

    def __eq__(self, other):
        if not isinstance(other, Gaussian):
            return NotImplemented
        return np.array_equal(self.mean, other.mean) and np.array_equal(self.cov, other.cov)

    def __hash__(self):
        return hash((self.mean.tobytes(), self.cov.tobytes()))

    def isclose(self, other: "Gaussian", atol: float = EQUAL_ATOL) -> bool:
        return (
            self.dim == other.dim
            and np.allclose(self.mean, other.mean, rtol=0.0, atol=atol)
            and np.allclose(self.cov, other.cov, rtol=0.0, atol=atol)
        )

    def sort_key(self) -> tuple:
        return tuple(self.mean) + tuple(self.cov.ravel())

    def __repr__(self):
        return f"Gaussian(mean={self.mean.tolist()}, cov={self.cov.tolist()})"

    def pdf(self, x) -> np.ndarray:
        """Vectorised density at points ``x`` of shape (..., N)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatchError(f"points have dimension {x.shape[-1]}, Gaussian has {self.dim}")
        L = np.linalg.cholesky(self.cov)
        diff = (x - self.mean).reshape(-1, self.dim)
        z = np.linalg.solve(L, diff.T)
        maha = np.sum(z * z, axis=0)
        log_norm = -0.5 * self.dim * np.log(2.0 * np.pi) - np.sum(np.log(np.diag(L)))
        return np.exp(log_norm - 0.5 * maha).reshape(x.shape[:-1])


def _check_dims(g0: Gaussian, g1: Gaussian):
    if g0.dim != g1.dim:
        raise DimensionMismatchError(f"Gaussians have dimensions {g0.dim} and {g1.dim}")


def _cross_root(g0: Gaussian, g1: Gaussian) -> np.ndarray:
    """(S0^1/2 S1 S0^1/2)^1/2"""
    R0 = g0.cov_sqrt
    return psd_sqrt(0.5 * ((R0 @ g1.cov @ R0) + (R0 @ g1.cov @ R0).T))


def w2_squared(g0: Gaussian, g1: Gaussian) -> float:
    _check_dims(g0, g1)
    dm = g0.mean - g1.mean
    if g0 is g1 or np.array_equal(g0.cov, g1.cov):
        return float(dm @ dm)
    cross = _cross_root(g0, g1)
    traces = np.trace(g0.cov) + np.trace(g1.cov)
    bures = traces - 2.0 * np.trace(cross)
    # cancellation noise; the exact value is >= 0
    if bures < 16 * g0.dim * np.finfo(float).eps * traces:
        bures = 0.0
    return float(dm @ dm + bures)


def w2_gaussian(g0: Gaussian, g1: Gaussian) -> float:
    """Wasserstein-2 distance between two Gaussians (closed form)."""
    return float(np.sqrt(w2_squared(g0, g1)))


def gaussian_interpolate(g0: Gaussian, g1: Gaussian, t: float) -> Gaussian:
    """Point at time ``t`` on the W2 geodesic from ``g0`` to ``g1``."""
    _check_dims(g0, g1)
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if t == 0.0:
        return g0
    if t == 1.0:
        return g1
    mean = (1.0 - t) * g0.mean + t * g1.mean
    inner = (1.0 - t) * g0.cov + t * _cross_root(g0, g1)
    Ri = g0.cov_inv_sqrt
    cov = Ri @ inner @ inner @ Ri
    return Gaussian(mean, 0.5 * (cov + cov.T))


def density(g: Gaussian, x) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != g.dim:
        raise DimensionMismatchError(f"point has dimension {x.size}, Gaussian has {g.dim}")
    return float(g.pdf(x[None, :])[0])
