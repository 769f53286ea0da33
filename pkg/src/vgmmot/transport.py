"""Exact solver for the discrete transportation problem between weight vectors.

Transportation simplex (MODI potentials) started from the north-west corner
rule, with Bland's smallest-index rule for both the entering and the leaving
cell. Masked cells are handled by a lexicographic objective: the primary cost
counts mass on forbidden cells, the secondary cost is the real one. Since
feasibility is established first by a max-flow check, the primary optimum is
zero and the secondary optimum is the optimum over the masked polytope.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, MarginalMismatchError, ModelValidationError, NumericalError

MARGINAL_TOL = 1e-9
ZERO_FLOW = 1e-14


@dataclass(frozen=True)
class Coupling:
    """Transport plan with its prescribed marginals."""

    entries: np.ndarray
    p0: np.ndarray
    p1: np.ndarray

    @property
    def shape(self):
        return self.entries.shape

    def support(self, threshold: float = 0.0):
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.entries > threshold))]


@dataclass(frozen=True)
class TransportSolution:
    value: float
    plan: Coupling

    def __iter__(self):
        yield self.value
        yield self.plan


@dataclass(frozen=True)
class Infeasible:
    """Outcome of a masked problem whose coupling set is empty."""

    reason: str = "no coupling satisfies the mask"

    def __bool__(self):
        return False


def _validate(cost, p0, p1):
    C = np.array(cost, dtype=float)
    a = np.array(p0, dtype=float).reshape(-1)
    b = np.array(p1, dtype=float).reshape(-1)
    if C.ndim != 2 or C.shape != (a.size, b.size):
        raise DimensionMismatchError(f"cost has shape {C.shape}, marginals have lengths {a.size} and {b.size}")
    if a.size == 0 or b.size == 0:
        raise DimensionMismatchError("marginals must be non-empty")
    if np.any(a < 0) or np.any(b < 0) or not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ModelValidationError("weights must be finite and non-negative")
    if abs(a.sum() - b.sum()) > MARGINAL_TOL:
        raise MarginalMismatchError(f"marginal masses differ: {a.sum()!r} vs {b.sum()!r}")
    if np.any(np.isnan(C)) or np.any(C == -np.inf):
        raise ModelValidationError("cost entries must be numbers or +inf")
    finite = np.isfinite(C)
    if np.any(C[finite] < 0):
        raise ModelValidationError("cost entries must be non-negative")
    return C, a, b


def solve_transport(cost, p0, p1) -> TransportSolution:
    """Minimise <cost, plan> over couplings of ``p0`` and ``p1``."""
    C, a, b = _validate(cost, p0, p1)
    result = _solve(C, a, b, np.isfinite(C))
    if isinstance(result, Infeasible):
        # only reachable through +inf entries
        raise ModelValidationError("cost matrix has +inf entries that admit no feasible plan; use solve_transport_masked")
    return result


def solve_transport_masked(cost, p0, p1, mask) -> TransportSolution | Infeasible:
    """Like :func:`solve_transport` but with ``plan[i, j] = 0`` wherever ``mask`` is False.

    Returns :class:`Infeasible` when no coupling respects the mask.
    """
    C, a, b = _validate(cost, p0, p1)
    M = np.array(mask, dtype=bool)
    if M.shape != C.shape:
        raise DimensionMismatchError(f"mask has shape {M.shape}, cost has shape {C.shape}")
    return _solve(C, a, b, M & np.isfinite(C))


def _solve(C, a, b, allowed):
    n0, n1 = C.shape
    rows = np.flatnonzero(a > 0)
    cols = np.flatnonzero(b > 0)
    full = np.zeros((n0, n1))
    p0, p1 = a.copy(), b.copy()
    if rows.size == 0 or cols.size == 0:
        if rows.size or cols.size:
            raise MarginalMismatchError("one marginal is zero while the other is not")
        return TransportSolution(0.0, Coupling(full, p0, p1))

    sub_allowed = allowed[np.ix_(rows, cols)]
    sa, sb = a[rows], b[cols]
    if not sub_allowed.all() and not mask_has_coupling(sa, sb, sub_allowed):
        return Infeasible()

    sub_cost = np.where(sub_allowed, C[np.ix_(rows, cols)], 0.0)
    penalty = (~sub_allowed).astype(float)
    flow = _transport_simplex(sub_cost, penalty, sa, sb)
    if np.any(flow[~sub_allowed] > ZERO_FLOW * max(1.0, sa.sum())):
        raise NumericalError("simplex left mass on a forbidden cell of a feasible masked problem")
    flow[~sub_allowed] = 0.0
    flow[flow < ZERO_FLOW * max(1.0, sa.sum())] = 0.0
    full[np.ix_(rows, cols)] = flow
    value = float(np.sum(full[allowed] * C[allowed]))
    return TransportSolution(value, Coupling(full, p0, p1))


def _north_west_corner(a, b):
    n0, n1 = a.size, b.size
    ra, rb = a.copy(), b.copy()
    flow = np.zeros((n0, n1))
    basis = []
    i = j = 0
    while True:
        x = max(min(ra[i], rb[j]), 0.0)
        row_done = ra[i] <= rb[j]
        flow[i, j] = x
        basis.append((i, j))
        ra[i] -= x
        rb[j] -= x
        if i == n0 - 1 and j == n1 - 1:
            break
        if (row_done and i < n0 - 1) or j == n1 - 1:
            i += 1
        else:
            j += 1
    return flow, basis


def _potentials(n0, n1, basis, c_hi, c_lo):
    """Solve u_i + v_j = c_ij on the basis spanning tree (u_0 = 0)."""
    adj = [[] for _ in range(n0 + n1)]
    for i, j in basis:
        adj[i].append(n0 + j)
        adj[n0 + j].append(i)
    u = np.full((n0, 2), np.nan)
    v = np.full((n1, 2), np.nan)
    u[0] = 0.0
    queue = deque([0])
    seen = {0}
    while queue:
        node = queue.popleft()
        for nxt in adj[node]:
            if nxt in seen:
                continue
            seen.add(nxt)
            if node < n0:
                i, j = node, nxt - n0
                v[j] = (c_hi[i, j] - u[i, 0], c_lo[i, j] - u[i, 1])
            else:
                i, j = nxt, node - n0
                u[i] = (c_hi[i, j] - v[j, 0], c_lo[i, j] - v[j, 1])
            queue.append(nxt)
    if len(seen) != n0 + n1:
        raise NumericalError("transport basis is not a spanning tree")
    return u, v


def _tree_path(n0, n1, basis, start, goal):
    """Node path through the basis tree from ``start`` to ``goal`` (graph node ids)."""
    adj = [[] for _ in range(n0 + n1)]
    for i, j in basis:
        adj[i].append(n0 + j)
        adj[n0 + j].append(i)
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nxt in adj[node]:
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    return path[::-1]


def _transport_simplex(c_lo, c_hi, a, b, max_iter=None):
    n0, n1 = c_lo.shape
    flow, basis = _north_west_corner(a, b)
    scale = max(1.0, float(np.max(np.abs(c_lo))))
    eps = 1e-12 * scale
    flow_tol = 1e-15 * max(1.0, float(a.sum()))
    if max_iter is None:
        max_iter = 1000 + 50 * (n0 * n1) ** 2
    for _ in range(max_iter):
        in_basis = set(basis)
        u, v = _potentials(n0, n1, basis, c_hi, c_lo)
        entering = None
        for i in range(n0):
            for j in range(n1):
                if (i, j) in in_basis:
                    continue
                r_hi = c_hi[i, j] - u[i, 0] - v[j, 0]
                if r_hi < -0.5 or (abs(r_hi) < 0.5 and c_lo[i, j] - u[i, 1] - v[j, 1] < -eps):
                    entering = (i, j)
                    break
            if entering is not None:
                break
        if entering is None:
            return flow

        ei, ej = entering
        nodes = _tree_path(n0, n1, basis, ei, n0 + ej)
        cycle = [(ei, ej)]
        for x, y in zip(nodes[:-1], nodes[1:]):
            cycle.append((x, y - n0) if x < n0 else (y, x - n0))
        minus = cycle[1::2]
        plus = cycle[0::2]
        theta = min(flow[c] for c in minus)
        leaving = min(c for c in minus if flow[c] <= theta + flow_tol)
        theta = flow[leaving]
        for c in plus:
            flow[c] += theta
        for c in minus:
            flow[c] -= theta
        flow[leaving] = 0.0
        basis.remove(leaving)
        basis.append(entering)
    raise NumericalError(f"transportation simplex did not terminate in {max_iter} pivots")


def mask_has_coupling(p0, p1, mask, tol: float = 1e-12) -> bool:
    """Max-flow test: does any coupling of ``p0``, ``p1`` vanish off ``mask``?"""
    a = np.asarray(p0, dtype=float)
    b = np.asarray(p1, dtype=float)
    allowed = np.asarray(mask, dtype=bool)
    n0, n1 = allowed.shape
    total = float(a.sum())
    # nodes: 0 source, 1..n0 rows, n0+1..n0+n1 cols, n0+n1+1 sink
    size = n0 + n1 + 2
    sink = size - 1
    cap = np.zeros((size, size))
    cap[0, 1 : n0 + 1] = a
    cap[n0 + 1 : n0 + n1 + 1, sink] = b
    big = 2.0 * total + 1.0
    for i, j in zip(*np.nonzero(allowed)):
        cap[1 + i, n0 + 1 + j] = big
    flow_value = 0.0
    cutoff = 1e-15 * max(1.0, total)
    while True:
        parent = [-1] * size
        parent[0] = 0
        queue = deque([0])
        while queue and parent[sink] == -1:
            x = queue.popleft()
            for y in np.flatnonzero(cap[x] > cutoff):
                if parent[y] == -1:
                    parent[y] = x
                    queue.append(y)
        if parent[sink] == -1:
            break
        bottleneck = np.inf
        y = sink
        while y != 0:
            bottleneck = min(bottleneck, cap[parent[y], y])
            y = parent[y]
        y = sink
        while y != 0:
            cap[parent[y], y] -= bottleneck
            cap[y, parent[y]] += bottleneck
            y = parent[y]
        flow_value += bottleneck
    return flow_value >= total - tol * max(1.0, total)
