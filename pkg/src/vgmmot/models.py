"""Mixture model containers and transport results."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, ModelValidationError, ZeroMassError
from .gaussian import Gaussian
from .graph import ChannelGraph, GraphPosition, delta_vector
from .transport import Coupling

BALANCE_TOL = 1e-9
MERGE_TOL = 1e-9


def _weights(weights, n):
    w = np.array(weights, dtype=float).reshape(-1)
    if w.size != n:
        raise ModelValidationError(f"{w.size} weights for {n} components")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ModelValidationError("component weights must be finite and positive")
    w.setflags(write=False)
    return w


def _common_dim(gaussians, dim):
    dims = {g.dim for g in gaussians}
    if len(dims) > 1:
        raise DimensionMismatchError(f"components have mixed dimensions {sorted(dims)}")
    if dims:
        d = dims.pop()
        if dim is not None and dim != d:
            raise DimensionMismatchError(f"declared dimension {dim} but components have dimension {d}")
        return d
    if dim is None:
        raise ModelValidationError("an empty mixture needs an explicit dimension")
    return int(dim)


class MixtureModel:
    """Weighted sum of Gaussians. Total mass is 1 in balanced use, any positive value otherwise."""

    def __init__(self, weights, gaussians, dim: int | None = None):
        self.gaussians = tuple(gaussians)
        if not all(isinstance(g, Gaussian) for g in self.gaussians):
            raise ModelValidationError("components must be Gaussian instances")
        self.weights = _weights(weights, len(self.gaussians))
        self.dim = _common_dim(self.gaussians, dim)

    @classmethod
    def from_components(cls, components, dim=None) -> "MixtureModel":
        components = list(components)
        return cls([w for w, _ in components], [g for _, g in components], dim=dim)

    @property
    def components(self):
        return list(zip(self.weights.tolist(), self.gaussians))

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self):
        return len(self.gaussians)

    def is_balanced(self, tol: float = BALANCE_TOL) -> bool:
        return abs(self.mass - 1.0) <= tol

    def require_positive_mass(self):
        if len(self) == 0 or self.mass <= 0:
            raise ZeroMassError("mixture has zero total mass")

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for w, g in self.components:
            out += w * g.pdf(x)
        return out

    def canonical(self, tol: float = MERGE_TOL):
        return _canonical([(g.sort_key(), g) for g in self.gaussians], self.weights, tol)

    def same_distribution(self, other: "MixtureModel", tol: float = MERGE_TOL) -> bool:
        return _same(self.canonical(tol), other.canonical(tol), tol)

    def __eq__(self, other):
        if not isinstance(other, MixtureModel):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.weights, other.weights) and self.gaussians == other.gaussians

    def __repr__(self):
        return f"MixtureModel(n={len(self)}, dim={self.dim}, mass={self.mass:.6g})"


class VectorInterpolant:
    """Weighted Gaussians placed at (possibly fractional) positions on a channel graph.

    ``source_channel`` is set when the graph carries an auxiliary source layer
    for unbalanced transport; that node is not one of the data channels.
    """

    def __init__(self, graph: ChannelGraph, weights, gaussians, positions, dim=None, source_channel=None):
        self.graph = graph
        self.gaussians = tuple(gaussians)
        self.weights = _weights(weights, len(self.gaussians))
        self.positions = tuple(positions)
        if len(self.positions) != len(self.gaussians):
            raise ModelValidationError("one position per component is required")
        for p in self.positions:
            p.validate(graph)
        self.dim = _common_dim(self.gaussians, dim)
        self.source_channel = source_channel

    @property
    def components(self):
        return list(zip(self.weights.tolist(), self.gaussians, self.positions))

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self):
        return len(self.gaussians)

    def channel_weights(self) -> np.ndarray:
        """(n, M) matrix: mass share of each component on each channel."""
        M = self.graph.node_count
        if not self.positions:
            return np.zeros((0, M))
        return np.vstack([delta_vector(p, M) for p in self.positions])

    def channel_masses(self) -> np.ndarray:
        return self.weights @ self.channel_weights() if len(self) else np.zeros(self.graph.node_count)

    def original_mass(self) -> float:
        masses = self.channel_masses()
        if self.source_channel is not None:
            masses = np.delete(masses, self.source_channel)
        return float(masses.sum())

    def split_source(self):
        """Return ``(original, source)``: the data-channel part and the source-layer part.

        Each is a list of ``(weight, gaussian, position)`` with the weight already
        multiplied by the component's share on that side.
        """
        if self.source_channel is None:
            return self.components, []
        original, source = [], []
        share = self.channel_weights()[:, self.source_channel] if len(self) else []
        for (w, g, p), s in zip(self.components, share):
            if s < 1.0:
                original.append((w * (1.0 - s), g, p))
            if s > 0.0:
                source.append((w * s, g, p))
        return original, source

    def canonical(self, tol: float = MERGE_TOL):
        keys = [((p.node_a, p.node_b, p.fraction) + g.sort_key(), g, p) for g, p in zip(self.gaussians, self.positions)]
        return _canonical(keys, self.weights, tol)

    def same_distribution(self, other, tol: float = MERGE_TOL) -> bool:
        return self.graph == other.graph and _same(self.canonical(tol), other.canonical(tol), tol)

    def __repr__(self):
        return f"{type(self).__name__}(n={len(self)}, dim={self.dim}, channels={self.graph.node_count}, mass={self.mass:.6g})"


class VectorMixtureModel(VectorInterpolant):
    """Vector GMM: every Gaussian lives on one channel (node) of the graph."""

    def __init__(self, graph: ChannelGraph, weights, gaussians, channels, dim=None):
        channels = [int(q) for q in channels]
        for q in channels:
            if not 0 <= q < graph.node_count:
                raise ModelValidationError(f"channel {q} is not a node of the graph (0..{graph.node_count - 1})")
        super().__init__(graph, weights, gaussians, [GraphPosition.node(q) for q in channels], dim=dim)
        self.channels = tuple(channels)

    @classmethod
    def from_components(cls, graph, components, dim=None) -> "VectorMixtureModel":
        components = list(components)
        return cls(graph, [c[0] for c in components], [c[1] for c in components], [c[2] for c in components], dim=dim)

    @property
    def components(self):
        return list(zip(self.weights.tolist(), self.gaussians, self.channels))

    def channel_mixture(self, q: int) -> MixtureModel:
        picked = [(w, g) for w, g, c in self.components if c == q]
        return MixtureModel.from_components(picked, dim=self.dim)

    def __eq__(self, other):
        if not isinstance(other, VectorMixtureModel):
            return NotImplemented
        return (
            self.graph == other.graph
            and self.dim == other.dim
            and np.array_equal(self.weights, other.weights)
            and self.gaussians == other.gaussians
            and self.channels == other.channels
        )


def _canonical(keyed, weights, tol):
    """Sort by key and merge entries whose Gaussians (and positions) agree within ``tol``."""
    order = sorted(range(len(keyed)), key=lambda k: keyed[k][0])
    merged = []
    for k in order:
        key, *objs = keyed[k]
        w = float(weights[k])
        for entry in merged:
            if _objs_close(entry[2], objs, tol):
                entry[1] += w
                break
        else:
            merged.append([key, w, objs])
    return merged


def _objs_close(a, b, tol):
    for x, y in zip(a, b):
        if isinstance(x, Gaussian):
            if not x.isclose(y, tol):
                return False
        elif x != y:
            if not (isinstance(x, GraphPosition) and _pos_close(x, y, tol)):
                return False
    return True


def _pos_close(p, q, tol):
    return (p.node_a, p.node_b) == (q.node_a, q.node_b) and abs(p.fraction - q.fraction) <= tol


def _same(c0, c1, tol):
    if len(c0) != len(c1):
        return False
    unused = list(c1)
    for _, w, objs in c0:
        for entry in unused:
            if abs(entry[1] - w) <= tol and _objs_close(objs, entry[2], tol):
                unused.remove(entry)
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class TransportResult:
    """Optimal value, plan and cost matrix of one transport problem.

    ``squared`` says whether ``distance**2`` (True) or ``distance`` (False)
    equals the plan-weighted cost. ``source_side`` is ``"start"`` when an extra
    row supplies created mass, ``"target"`` when an extra column absorbs
    destroyed mass, and None for balanced problems.
    """

    distance: float
    plan: Coupling
    cost: np.ndarray
    squared: bool = True
    mask: np.ndarray | None = None
    source_side: str | None = None
    meta: dict = field(default_factory=dict)

    @property
    def objective(self) -> float:
        allowed = np.isfinite(self.cost)
        return float(np.sum(self.plan.entries[allowed] * self.cost[allowed]))
