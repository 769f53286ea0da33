"""Small dense symmetric-matrix routines used by the Gaussian transport formulas.

Eigendecompositions use cyclic Jacobi rotations. Matrices here are covariance
matrices of image-space Gaussians, so N is tiny (typically <= 3, at most ~16).
"""

from __future__ import annotations

import numpy as np

from .errors import ModelValidationError, NotPSDError, NumericalError, SingularCovarianceError

SYMMETRY_RTOL = 1e-10
CLAMP_RTOL = 1e-10
SINGULAR_FLOOR = 1e-12
MAX_SWEEPS = 100


def as_symmetric(S) -> np.ndarray:
    """Validate ``S`` as a square symmetric matrix and return a float copy."""
    A = np.array(S, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ModelValidationError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ModelValidationError("matrix has non-finite entries")
    bound = SYMMETRY_RTOL * np.maximum(1.0, np.abs(A))
    if np.any(np.abs(A - A.T) > bound):
        raise ModelValidationError("matrix is not symmetric")
    return 0.5 * (A + A.T)


def sym_eig(S, tol: float = 1e-15, max_sweeps: int = MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, V)`` with eigenvalues sorted in descending order and
    the matching orthonormal eigenvectors in the columns of ``V``.
    """
    A = as_symmetric(S)
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if scale == 0.0 or n == 1:
        return _sorted(np.diag(A).copy(), V)

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(A, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(apq) < 1e-18 * abs(diff):
                    # theta would overflow; t = 1 / (2 theta) to machine precision
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    # smaller root of t^2 + 2 theta t - 1 = 0, stable for large theta
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        off = np.sqrt(np.sum(np.triu(A, 1) ** 2))
        if off > 1e3 * tol * scale:
            raise NumericalError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps (off-norm {off:.3e})")
    return _sorted(np.diag(A).copy(), V)


def _sorted(lam, V):
    order = np.argsort(-lam, kind="stable")
    return lam[order], V[:, order]


def _from_eig(lam, V):
    R = (V * lam) @ V.T
    return 0.5 * (R + R.T)


def psd_sqrt(S) -> np.ndarray:
    """Symmetric PSD square root. Round-off negatives (>= -1e-10 * max eig) are clamped to 0."""
    lam, V = sym_eig(S)
    lam_max = max(lam[0], 0.0)
    if lam[-1] < -CLAMP_RTOL * lam_max or (lam_max == 0.0 and lam[-1] < 0.0):
        raise NotPSDError(f"matrix is not positive semidefinite: eigenvalue {lam[-1]:.6e}")
    return _from_eig(np.sqrt(np.clip(lam, 0.0, None)), V)


def psd_inv_sqrt(S, floor: float = SINGULAR_FLOOR) -> np.ndarray:
    lam, V = sym_eig(S)
    if lam[-1] < floor:
        raise SingularCovarianceError(f"matrix is singular or indefinite: min eigenvalue {lam[-1]:.6e} < {floor:g}")
    return _from_eig(1.0 / np.sqrt(lam), V)
