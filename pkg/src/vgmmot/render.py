"""Rasterising mixtures onto grids and writing PPM frame strips."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ModelValidationError
from .models import MixtureModel, VectorInterpolant

BAR_HEIGHT = 128

_RGB = {
    1: [(1.0, 1.0, 1.0)],
    2: [(1.0, 0.0, 0.0), (0.0, 0.0, 1.0)],
    3: [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)],
}
_EXTRA = [(1.0, 1.0, 0.0), (1.0, 0.0, 1.0), (0.0, 1.0, 1.0), (1.0, 0.5, 0.0), (0.5, 0.5, 0.5)]


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned sample grid; ``n[k]`` points from ``lo[k]`` to ``hi[k]`` inclusive."""

    lo: tuple
    hi: tuple
    n: tuple

    def __post_init__(self):
        if not (len(self.lo) == len(self.hi) == len(self.n)) or len(self.n) not in (1, 2):
            raise ModelValidationError("grid must have 1 or 2 axes")
        for a, b, k in zip(self.lo, self.hi, self.n):
            if not (b > a) or int(k) < 2:
                raise ModelValidationError(f"bad grid axis {a}:{b}:{k}")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """``"x0:x1:nx[,y0:y1:ny]"``"""
        lo, hi, n = [], [], []
        try:
            for axis in text.split(","):
                a, b, k = axis.split(":")
                lo.append(float(a))
                hi.append(float(b))
                n.append(int(k))
        except ValueError as exc:
            raise ModelValidationError(f"cannot parse grid {text!r}: expected x0:x1:nx[,y0:y1:ny]") from exc
        return cls(tuple(lo), tuple(hi), tuple(n))

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def spacing(self) -> np.ndarray:
        return np.array([(b - a) / (k - 1) for a, b, k in zip(self.lo, self.hi, self.n)])

    def points(self) -> np.ndarray:
        """Sample points, shape ``(*shape, dim)``; 2-D grids are indexed ``[y, x]``."""
        axes = [np.linspace(a, b, k) for a, b, k in zip(self.lo, self.hi, self.n)]
        if self.dim == 1:
            return axes[0][:, None]
        X, Y = np.meshgrid(axes[0], axes[1])
        return np.stack([X, Y], axis=-1)

    @property
    def shape(self) -> tuple:
        return tuple(self.n) if self.dim == 1 else (self.n[1], self.n[0])


@dataclass(frozen=True)
class DensityGrid:
    origin: np.ndarray
    spacing: np.ndarray
    shape: tuple
    channels: np.ndarray  # (M, *shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def channel_mass(self) -> np.ndarray:
        return self.channels.reshape(self.channels.shape[0], -1).sum(axis=1) * self.cell_volume


def auto_grid(models, dim: int, n: int | None = None, pad: float = 4.0) -> GridSpec:
    """Bounding box of all components' means +- ``pad`` standard deviations."""
    lo = np.full(dim, np.inf)
    hi = np.full(dim, -np.inf)
    for model in models:
        for g in model.gaussians:
            sd = np.sqrt(np.diag(g.cov))
            lo = np.minimum(lo, g.mean - pad * sd)
            hi = np.maximum(hi, g.mean + pad * sd)
    if not np.all(np.isfinite(lo)):
        lo, hi = np.full(dim, -1.0), np.full(dim, 1.0)
    n = n or (400 if dim == 1 else 128)
    return GridSpec(tuple(lo.tolist()), tuple(hi.tolist()), (n,) * dim)


def rasterize(model, grid: GridSpec) -> DensityGrid:
    """Per-channel density of a mixture on ``grid``.

    A component at a fractional graph position contributes to each channel in
    proportion to its channel vector. Plain mixtures give a single channel.
    """
    if model.dim != grid.dim:
        raise ModelValidationError(f"cannot rasterise a {model.dim}-D model on a {grid.dim}-D grid")
    if model.dim not in (1, 2):
        raise ModelValidationError("only 1-D and 2-D models can be rasterised")
    pts = grid.points()
    if isinstance(model, VectorInterpolant):
        shares = model.channel_weights()
        M = model.graph.node_count
    elif isinstance(model, MixtureModel):
        shares = np.ones((len(model), 1))
        M = 1
    else:
        raise TypeError(f"cannot rasterise {type(model).__name__}")
    out = np.zeros((M,) + grid.shape)
    for k, (w, g) in enumerate(zip(model.weights, model.gaussians)):
        dens = w * g.pdf(pts)
        for c in np.flatnonzero(shares[k]):
            out[c] += shares[k, c] * dens
    return DensityGrid(np.array(grid.lo), grid.spacing, grid.shape, out)


def palette(M: int):
    if M in _RGB:
        return _RGB[M]
    return (_RGB[3] + _EXTRA * (1 + M // len(_EXTRA)))[:M]


def to_rgb(grid: DensityGrid, vmax: float) -> np.ndarray:
    """8-bit RGB image: linear map of density / vmax, channel colours added and clipped."""
    colors = np.array(palette(grid.channels.shape[0]))
    scale = 1.0 / vmax if vmax > 0 else 0.0
    if len(grid.shape) == 2:
        rgb = np.tensordot(grid.channels * scale, colors, axes=([0], [0]))
    else:
        nx = grid.shape[0]
        heights = np.floor(grid.channels * scale * BAR_HEIGHT + 0.5)
        rows = np.arange(BAR_HEIGHT, 0, -1)[:, None]
        rgb = np.zeros((BAR_HEIGHT, nx, 3))
        for c, color in enumerate(colors):
            lit = heights[c][None, :] >= rows
            rgb += lit[:, :, None] * np.asarray(color)
    return np.floor(np.clip(rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def write_ppm(path, rgb: np.ndarray):
    """Binary PPM (P6, maxval 255, row-major)."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    Path(path).write_bytes(b"P6\n%d %d\n255\n" % (w, h) + rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6" or parts[3] != b"255":
        raise ModelValidationError(f"{path} is not an 8-bit binary PPM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(data[len(data) - w * h * 3 :], dtype=np.uint8).reshape(h, w, 3)


def write_frames(grids, out_dir, prefix: str = "frame", vmax: float | None = None):
    """One PPM per grid, normalised by the maximum density over the whole sequence."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grids = list(grids)
    if vmax is None:
        vmax = max((float(g.channels.max()) for g in grids), default=0.0)
    paths = []
    for k, g in enumerate(grids):
        path = out_dir / f"{prefix}_{k:03d}.ppm"
        write_ppm(path, to_rgb(g, vmax))
        paths.append(path)
    return paths
