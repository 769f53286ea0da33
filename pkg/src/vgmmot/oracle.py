"""Brute-force reference computations used to check the fast paths.

Nothing here is used by the library itself. These are slow on purpose and
share no code with the solvers they verify.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from .errors import ModelValidationError

MAX_ORACLE_SIZE = 4


@dataclass(frozen=True)
class Grid1D:
    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.points, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        if x.shape != m.shape or x.ndim != 1:
            raise ModelValidationError("points and masses must be 1-D arrays of equal length")
        if np.any(np.diff(x) <= 0):
            raise ModelValidationError("grid points must be strictly ascending")
        if np.any(m < 0) or abs(m.sum() - 1.0) > 1e-9:
            raise ModelValidationError(f"grid masses must be non-negative and sum to 1 (sum={m.sum()!r})")
        object.__setattr__(self, "points", x)
        object.__setattr__(self, "masses", m)

    @classmethod
    def from_density(cls, pdf, lo: float, hi: float, n: int = 2000) -> "Grid1D":
        x = np.linspace(lo, hi, n)
        m = np.asarray(pdf(x), dtype=float)
        return cls(x, m / m.sum())


def w2_1d_quantile(f0: Grid1D, f1: Grid1D) -> float:
    """Exact W2 between two discrete 1-D distributions via the monotone coupling."""
    c0 = np.cumsum(f0.masses)
    c1 = np.cumsum(f1.masses)
    c0[-1] = c1[-1] = 1.0
    # merged breakpoints of both CDFs; each interval of quantile levels pairs one atom with one atom
    levels = np.union1d(c0, c1)
    widths = np.diff(np.concatenate(([0.0], levels)))
    i0 = np.minimum(np.searchsorted(c0, levels, side="left"), c0.size - 1)
    i1 = np.minimum(np.searchsorted(c1, levels, side="left"), c1.size - 1)
    d = f0.points[i0] - f1.points[i1]
    return float(np.sqrt(np.sum(widths * d * d)))


def _spanning_trees(n0, n1):
    """Yield every spanning tree of the complete bipartite graph K_{n0,n1} as a cell list."""
    cells = [(i, j) for i in range(n0) for j in range(n1)]
    need = n0 + n1 - 1

    def find(parent, x):
        while parent[x] != x:
            x = parent[x]
        return x

    def rec(start, chosen, parent):
        if len(chosen) == need:
            yield list(chosen)
            return
        for k in range(start, len(cells)):
            if len(cells) - k < need - len(chosen):
                return
            i, j = cells[k]
            ri, rj = find(parent, i), find(parent, n0 + j)
            if ri == rj:
                continue
            child = list(parent)
            child[ri] = rj
            chosen.append(cells[k])
            yield from rec(k + 1, chosen, child)
            chosen.pop()

    yield from rec(0, [], list(range(n0 + n1)))


def _basic_solution(tree, a, b):
    """Unique flow on a spanning-tree basis, by peeling leaves."""
    n0, n1 = a.size, b.size
    ra = list(a)
    rb = list(b)
    remaining = list(tree)
    flows = {}
    while remaining:
        deg = {}
        for i, j in remaining:
            deg[("r", i)] = deg.get(("r", i), 0) + 1
            deg[("c", j)] = deg.get(("c", j), 0) + 1
        for cell in remaining:
            i, j = cell
            if deg[("r", i)] == 1:
                x = ra[i]
                break
            if deg[("c", j)] == 1:
                x = rb[j]
                break
        flows[cell] = x
        ra[i] -= x
        rb[j] -= x
        remaining.remove(cell)
    plan = np.zeros((n0, n1))
    for (i, j), x in flows.items():
        plan[i, j] = x
    return plan


def enumerate_transport_vertices(cost, p0, p1, mask=None, tol: float = 1e-12):
    """Minimum of <cost, plan> over all vertices of the (masked) transportation polytope.

    Returns ``None`` when the masked polytope is empty.
    """
    C = np.asarray(cost, dtype=float)
    a = np.asarray(p0, dtype=float)
    b = np.asarray(p1, dtype=float)
    n0, n1 = C.shape
    if n0 > MAX_ORACLE_SIZE or n1 > MAX_ORACLE_SIZE:
        raise ValueError(f"oracle limited to {MAX_ORACLE_SIZE}x{MAX_ORACLE_SIZE} instances")
    allowed = np.ones_like(C, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    allowed = allowed & np.isfinite(C)
    best = None
    for tree in _spanning_trees(n0, n1):
        plan = _basic_solution(tree, a, b)
        if plan.min() < -tol or np.any(plan[~allowed] > tol):
            continue
        value = float(np.sum(plan[allowed] * C[allowed]))
        if best is None or value < best:
            best = value
    return best


def mask_feasible(p0, p1, mask, tol: float = 1e-12) -> bool:
    """True iff some coupling of ``p0`` and ``p1`` is supported on ``mask`` (networkx max-flow)."""
    a = np.asarray(p0, dtype=float)
    b = np.asarray(p1, dtype=float)
    allowed = np.asarray(mask, dtype=bool)
    G = nx.DiGraph()
    for i, w in enumerate(a):
        G.add_edge("s", ("r", i), capacity=float(w))
    for j, w in enumerate(b):
        G.add_edge(("c", j), "t", capacity=float(w))
    for i, j in zip(*np.nonzero(allowed)):
        G.add_edge(("r", int(i)), ("c", int(j)))
    value = nx.maximum_flow_value(G, "s", "t") if G.has_node("t") and G.has_node("s") else 0.0
    return bool(abs(value - a.sum()) <= tol * max(1.0, a.sum()))
