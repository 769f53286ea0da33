"""Image ingestion and weighted EM fitting of Gaussian mixtures."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelValidationError, ZeroMassError
from .gaussian import Gaussian
from .graph import ChannelGraph
from .models import MixtureModel, VectorMixtureModel


@dataclass(frozen=True)
class WeightedSamples:
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.points, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if x.ndim != 2 or x.shape[0] != w.size:
            raise ModelValidationError(f"{x.shape[0]} points but {w.size} weights")
        if x.shape[0] == 0:
            raise ModelValidationError("no samples")
        if np.any(w < 0) or not np.all(np.isfinite(w)) or not np.all(np.isfinite(x)):
            raise ModelValidationError("weights must be finite and non-negative, points finite")
        if w.sum() <= 0:
            raise ZeroMassError("samples have zero total weight")
        object.__setattr__(self, "points", x)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def moments(self):
        """Weighted mean and (biased) covariance."""
        p = self.weights / self.weights.sum()
        mean = p @ self.points
        d = self.points - mean
        return mean, (d * p[:, None]).T @ d


@dataclass
class EMResult:
    model: MixtureModel
    log_likelihood: list = field(default_factory=list)
    n_iter: int = 0
    converged: bool = False


def _log_gauss(X, mean, cov):
    L = np.linalg.cholesky(cov)
    z = np.linalg.solve(L, (X - mean).T)
    return -0.5 * np.sum(z * z, axis=0) - np.sum(np.log(np.diag(L))) - 0.5 * X.shape[1] * np.log(2.0 * np.pi)


def _floor_cov(S, floor):
    """Closest-in-likelihood covariance with every eigenvalue >= floor."""
    S = 0.5 * (S + S.T)
    lam, V = np.linalg.eigh(S)
    if lam.min() >= floor:
        return S
    C = (V * np.maximum(lam, floor)) @ V.T
    return 0.5 * (C + C.T)


def _kmeans_pp(X, p, k, rng):
    n = X.shape[0]
    centers = [int(rng.choice(n, p=p))]
    d2 = np.sum((X - X[centers[0]]) ** 2, axis=1)
    for _ in range(1, k):
        score = p * d2
        if score.sum() <= 0:
            # every remaining mass sits on a chosen center
            candidates = np.setdiff1d(np.flatnonzero(p > 0), centers)
            nxt = int(candidates[0])
        else:
            nxt = int(rng.choice(n, p=score / score.sum()))
        centers.append(nxt)
        d2 = np.minimum(d2, np.sum((X - X[nxt]) ** 2, axis=1))
    return X[centers]


def _e_step(X, log_pi, means, covs):
    logp = np.column_stack([log_pi[c] + _log_gauss(X, means[c], covs[c]) for c in range(len(means))])
    top = logp.max(axis=1, keepdims=True)
    lse = top[:, 0] + np.log(np.sum(np.exp(logp - top), axis=1))
    resp = np.exp(logp - lse[:, None])
    return resp, lse


def _m_step(X, p, resp, floor, old_means, old_covs):
    nk = p @ resp
    means, covs = [], []
    for c in range(resp.shape[1]):
        if nk[c] <= 0:
            means.append(old_means[c])
            covs.append(old_covs[c])
            continue
        r = p * resp[:, c]
        mean = r @ X / nk[c]
        d = X - mean
        means.append(mean)
        covs.append(_floor_cov((d * r[:, None]).T @ d / nk[c], floor))
    with np.errstate(divide="ignore"):
        log_pi = np.log(nk / nk.sum())
    return log_pi, means, covs


def fit_gmm_em_detailed(
    data: WeightedSamples,
    k: int,
    max_iter: int = 200,
    tol: float = 1e-8,
    seed: int = 0,
    jitter: float | None = None,
) -> EMResult:
    """EM for a ``k``-component Gaussian mixture on weighted samples.

    Initialised by weighted k-means++ seeding. ``jitter`` is a floor on every
    covariance eigenvalue (default ``1e-6 * range**2``); the floored covariance
    is the exact constrained M-step, so the weighted log-likelihood never
    decreases. The returned mixture has unit mass.
    """
    X, w = data.points, data.weights
    k = int(k)
    if k < 1:
        raise ModelValidationError("k must be a positive integer")
    distinct = np.unique(X[w > 0], axis=0).shape[0]
    if k > distinct:
        raise ModelValidationError(f"k={k} exceeds the number of distinct weighted points ({distinct})")
    if jitter is None:
        span = float(np.max(np.ptp(X[w > 0], axis=0)))
        jitter = 1e-6 * (span if span > 0 else 1.0) ** 2
    p = w / w.sum()
    rng = np.random.default_rng(seed)

    centers = _kmeans_pp(X, p, k, rng)
    assign = np.argmin(((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2), axis=1)
    resp = np.eye(k)[assign]
    base_cov = _floor_cov(data.moments()[1], jitter)
    log_pi, means, covs = _m_step(X, p, resp, jitter, list(centers), [base_cov] * k)

    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        resp, lse = _e_step(X, log_pi, means, covs)
        ll = float(p @ lse)
        history.append(ll)
        if len(history) > 1 and history[-1] - history[-2] <= tol * max(1.0, abs(history[-1])):
            converged = True
            break
        log_pi, means, covs = _m_step(X, p, resp, jitter, means, covs)

    weights = np.exp(log_pi)
    keep = weights > 0
    model = MixtureModel(
        weights[keep] / weights[keep].sum(),
        [Gaussian(m, c) for m, c, ok in zip(means, covs, keep) if ok],
    )
    return EMResult(model, history, it, converged)


def fit_gmm_em(data: WeightedSamples, k: int, max_iter: int = 200, tol: float = 1e-8, seed: int = 0, jitter=None) -> MixtureModel:
    return fit_gmm_em_detailed(data, k, max_iter=max_iter, tol=tol, seed=seed, jitter=jitter).model


def read_image(path) -> np.ndarray:
    """Image as a float array (H, W, C) in [0, 1], C in {1, 3}."""
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            if im.mode in ("L", "I;16", "I", "F", "1"):
                arr = np.asarray(im.convert("F"), dtype=float)
                arr = arr / (65535.0 if im.mode.startswith("I") and arr.max() > 255 else 255.0)
                return arr[:, :, None]
            if im.mode in ("RGB", "P", "RGBA", "LA", "CMYK", "YCbCr"):
                if im.mode in ("RGBA", "LA"):
                    raise ModelValidationError(f"unsupported image mode {im.mode}: alpha channels are not allowed")
                return np.asarray(im.convert("RGB"), dtype=float) / 255.0
            raise ModelValidationError(f"unsupported image mode {im.mode}")
    except (UnidentifiedImageError, OSError) as exc:
        raise ModelValidationError(f"cannot decode image {path}: {exc}") from exc


def image_to_channels(path):
    """Per-channel weighted pixel samples of an image.

    Intensities (scaled to [0, 1]) are the weights; samples sit at pixel
    centres ``(col + 0.5, row + 0.5)``. Zero pixels are dropped. Returns
    ``(samples, masses)`` where ``samples[c]`` is None for an empty channel.
    """
    arr = read_image(path)
    H, W, C = arr.shape
    rows, cols = np.mgrid[0:H, 0:W]
    coords = np.column_stack([cols.ravel() + 0.5, rows.ravel() + 0.5])
    samples, masses = [], []
    for c in range(C):
        v = arr[:, :, c].ravel()
        nz = v > 0
        masses.append(float(v.sum()))
        samples.append(WeightedSamples(coords[nz], v[nz]) if nz.any() else None)
    if sum(masses) <= 0:
        raise ZeroMassError(f"image {path} has zero total intensity")
    return samples, masses


def image_graph(channels: int) -> ChannelGraph:
    """R-G-B chain for colour images (red and blue joined through green); one node for grey."""
    return ChannelGraph.chain(channels)


def fit_image(path, k: int = 10, seed: int = 0, balanced: bool = True, **em) -> VectorMixtureModel:
    """Fit ``k`` Gaussians per non-empty channel and assemble a vector mixture.

    Channel weights are scaled to the channel's share of total intensity when
    ``balanced`` (total mass 1), or to the raw channel intensity otherwise.
    """
    samples, masses = image_to_channels(path)
    total = sum(masses)
    weights, gaussians, channels = [], [], []
    for c, (s, m) in enumerate(zip(samples, masses)):
        if s is None:
            continue
        mix = fit_gmm_em(s, k, seed=seed, **em)
        scale = m / total if balanced else m
        weights.extend((mix.weights * scale).tolist())
        gaussians.extend(mix.gaussians)
        channels.extend([c] * len(mix))
    return VectorMixtureModel(image_graph(len(samples)), weights, gaussians, channels)
