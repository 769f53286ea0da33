"""Transport between vector Gaussian mixtures whose channels are linked by a graph.

Three constructions are available, selected by ``approach``:

* 0 -- squared W2 cost, couplings restricted to same or adjacent channels.
  Only a pseudo-metric and possibly infeasible.
* 1 -- cost ``W2 + gamma * d_G``; the distance is the optimal value itself.
* 2 -- cost ``W2**2 + gamma * d_G**2``; the distance is its square root.

``d_G`` is the shortest-path length on the channel graph. Costs also accept
interpolants whose components sit part-way along an edge; there ``d_G`` is the
length of the shortest route through the graph drawn as a 1-D complex.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatchError,
    InfeasibleError,
    ModelValidationError,
    UnbalancedInputError,
    ZeroMassError,
)
from .gaussian import gaussian_interpolate, w2_gaussian, w2_squared
from .graph import ChannelGraph, GraphPosition, path_interpolate, position_distance
from .models import BALANCE_TOL, TransportResult, VectorInterpolant, VectorMixtureModel
from .transport import Infeasible, solve_transport, solve_transport_masked

APPROACHES = (0, 1, 2)
DEFICIT_TOL = 1e-12


def _check_pair(rho0, rho1):
    if rho0.graph != rho1.graph:
        raise ModelValidationError("both vector mixtures must use the same channel graph")
    if len(rho0) and len(rho1) and rho0.dim != rho1.dim:
        raise DimensionMismatchError(f"mixtures have dimensions {rho0.dim} and {rho1.dim}")


def _check_balanced(*models):
    for rho in models:
        if abs(rho.mass - 1.0) > BALANCE_TOL:
            raise UnbalancedInputError(
                f"vector mixture has total mass {rho.mass!r}, expected 1; use unbalanced_vgmm_distance"
            )


def _check_gamma(gamma):
    gamma = float(gamma)
    if not gamma >= 0.0 or not np.isfinite(gamma):
        raise ModelValidationError(f"gamma must be a finite non-negative number, got {gamma}")
    return gamma


def _graph_distances(rho0, rho1) -> np.ndarray:
    G = rho0.graph
    return np.array([[position_distance(G, p, q) for q in rho1.positions] for p in rho0.positions]).reshape(
        len(rho0), len(rho1)
    )


def _w2_matrix(rho0, rho1, squared: bool) -> np.ndarray:
    f = w2_squared if squared else w2_gaussian
    return np.array([[f(g0, g1) for g1 in rho1.gaussians] for g0 in rho0.gaussians]).reshape(len(rho0), len(rho1))


def cost_matrix_v1(rho0, rho1, gamma: float) -> np.ndarray:
    """``W2(nu_i, nu_j) + gamma * d_G(q_i, q_j)``"""
    _check_pair(rho0, rho1)
    gamma = _check_gamma(gamma)
    return _w2_matrix(rho0, rho1, squared=False) + gamma * _graph_distances(rho0, rho1)


def cost_matrix_v2(rho0, rho1, gamma: float) -> np.ndarray:
    """``W2(nu_i, nu_j)**2 + gamma * d_G(q_i, q_j)**2``"""
    _check_pair(rho0, rho1)
    gamma = _check_gamma(gamma)
    return _w2_matrix(rho0, rho1, squared=True) + gamma * _graph_distances(rho0, rho1) ** 2


def channel_mask(rho0, rho1) -> np.ndarray:
    """Cells allowed under approach 0: every channel pair involved is equal or adjacent."""
    _check_pair(rho0, rho1)
    G = rho0.graph

    def ok(p, q):
        return all(x == y or G.has_edge(x, y) for x, _ in p.anchors() for y, _ in q.anchors())

    return np.array([[ok(p, q) for q in rho1.positions] for p in rho0.positions], dtype=bool).reshape(
        len(rho0), len(rho1)
    )


def cost_matrix_v0(rho0, rho1):
    """Squared-W2 costs and the adjacency mask of approach 0."""
    return _w2_matrix(rho0, rho1, squared=True), channel_mask(rho0, rho1)


def vgmm_distance(rho0, rho1, gamma: float = 1.0, approach: int = 2) -> TransportResult | Infeasible:
    """Distance between two balanced vector mixtures (or interpolants).

    Approach 0 returns :class:`Infeasible` when no coupling respects the graph.
    """
    _check_pair(rho0, rho1)
    _check_balanced(rho0, rho1)
    if approach not in APPROACHES:
        raise ModelValidationError(f"approach must be one of {APPROACHES}, got {approach!r}")
    gamma = _check_gamma(gamma)
    meta = {"approach": approach, "gamma": gamma}
    if approach == 0:
        cost, mask = cost_matrix_v0(rho0, rho1)
        sol = solve_transport_masked(cost, rho0.weights, rho1.weights, mask)
        if isinstance(sol, Infeasible):
            return Infeasible("no coupling moves mass only within or between adjacent channels")
        return TransportResult(float(np.sqrt(sol.value)), sol.plan, cost, squared=True, mask=mask, meta=meta)
    if approach == 1:
        cost = cost_matrix_v1(rho0, rho1, gamma)
        sol = solve_transport(cost, rho0.weights, rho1.weights)
        return TransportResult(sol.value, sol.plan, cost, squared=False, meta=meta)
    cost = cost_matrix_v2(rho0, rho1, gamma)
    sol = solve_transport(cost, rho0.weights, rho1.weights)
    return TransportResult(float(np.sqrt(sol.value)), sol.plan, cost, squared=True, meta=meta)


def _route(G: ChannelGraph, q0: int, q1: int, t: float, approach: int) -> GraphPosition:
    if approach == 0:
        if q0 == q1 or G.has_edge(q0, q1):
            return GraphPosition(q0, q1, t)
        return GraphPosition(q0, q1, t, direct=True)
    _, path = G.shortest_path(q0, q1)
    return path_interpolate(path, t, G)


def interpolant_from_plan(graph, comps0, comps1, plan, t, approach=2, source_channel=None) -> VectorInterpolant:
    """Displacement interpolant at time ``t`` for an explicit plan.

    ``comps0`` / ``comps1`` are lists of ``(weight, gaussian, channel)``; the
    result has one component per positive plan entry.
    """
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    P = np.asarray(plan)
    weights, gaussians, positions = [], [], []
    dim = comps0[0][1].dim if comps0 else (comps1[0][1].dim if comps1 else None)
    for i, j in zip(*np.nonzero(P > 0)):
        _, g0, q0 = comps0[i]
        _, g1, q1 = comps1[j]
        weights.append(P[i, j])
        gaussians.append(gaussian_interpolate(g0, g1, t))
        positions.append(_route(graph, q0, q1, t, approach))
    return VectorInterpolant(graph, weights, gaussians, positions, dim=dim, source_channel=source_channel)


def _require_models(*models):
    for rho in models:
        if not isinstance(rho, VectorMixtureModel):
            raise ModelValidationError("interpolation endpoints must be VectorMixtureModel instances")


def vgmm_interpolate(rho0, rho1, t: float, gamma: float = 1.0, approach: int = 2, result=None) -> VectorInterpolant:
    """Point at time ``t`` on the displacement interpolation between two vector mixtures.

    Pass a precomputed ``result`` of :func:`vgmm_distance` to skip the LP when
    sampling several times.
    """
    _require_models(rho0, rho1)
    if result is None:
        result = vgmm_distance(rho0, rho1, gamma, approach)
    if isinstance(result, Infeasible):
        raise InfeasibleError(result.reason)
    return interpolant_from_plan(rho0.graph, rho0.components, rho1.components, result.plan.entries, t, approach)


# -- unbalanced ---------------------------------------------------------------


def with_source_layer(G: ChannelGraph) -> ChannelGraph:
    """Copy of ``G`` plus one node joined to every original node."""
    M = G.node_count
    edges = G.edges + [(k, M) for k in range(M)]
    lengths = [G.edge_length(*e) for e in G.edges] + [1.0] * M
    return ChannelGraph(M + 1, edges, lengths)


def source_augmented_solve(base_cost, w0, w1, gamma_source):
    """Balance two weight vectors with one implicit source node priced ``gamma_source`` per unit mass.

    Returns ``(solution, cost, side)`` with side ``"start"`` (extra row),
    ``"target"`` (extra column) or None.
    """
    w0 = np.asarray(w0, dtype=float)
    w1 = np.asarray(w1, dtype=float)
    m0, m1 = w0.sum(), w1.sum()
    if m0 <= 0 or m1 <= 0:
        raise ZeroMassError("both sides need positive total mass")
    deficit = m0 - m1
    cost = np.asarray(base_cost, dtype=float)
    side = None
    if deficit > DEFICIT_TOL * max(m0, m1):
        cost = np.hstack([cost, np.full((cost.shape[0], 1), gamma_source)])
        w1 = np.append(w1, deficit)
        side = "target"
    elif -deficit > DEFICIT_TOL * max(m0, m1):
        cost = np.vstack([cost, np.full((1, cost.shape[1]), gamma_source)])
        w0 = np.append(w0, -deficit)
        side = "start"
    else:
        # masses agree to round-off; rescale so the LP sees exact balance
        w1 = w1 * (m0 / m1)
    return solve_transport(cost, w0, w1), cost, side


def explicit_source_pair(comps0, comps1, plan, side, source_channel):
    """Materialise the implicit source node as same-shaped Gaussians on the source channel.

    Returns ``(comps0', comps1', plan')`` where every source entry of ``plan``
    becomes a copy of its partner's Gaussian and ``plan'`` is square in the
    added rows/columns.
    """
    P = np.asarray(plan)
    comps0 = list(comps0)
    comps1 = list(comps1)
    n0, n1 = len(comps0), len(comps1)
    if side is None:
        return comps0, comps1, P[:n0, :n1]
    if side == "target":
        sources = [(i, P[i, n1]) for i in range(n0) if P[i, n1] > 0]
        extra = [(w, comps0[i][1], source_channel) for i, w in sources]
        out = np.zeros((n0, n1 + len(extra)))
        out[:, :n1] = P[:, :n1]
        for k, (i, w) in enumerate(sources):
            out[i, n1 + k] = w
        return comps0, comps1 + extra, out
    sources = [(j, P[n0, j]) for j in range(n1) if P[n0, j] > 0]
    extra = [(w, comps1[j][1], source_channel) for j, w in sources]
    out = np.zeros((n0 + len(extra), n1))
    out[:n0, :] = P[:n0, :]
    for k, (j, w) in enumerate(sources):
        out[n0 + k, j] = w
    return comps0 + extra, comps1, out


def unbalanced_vgmm_distance(rho0, rho1, gamma: float = 1.0, gamma_source: float | None = None) -> TransportResult:
    """Approach-2 distance between vector mixtures of unequal total mass.

    The mass difference is placed in a source layer adjacent to every channel;
    using it costs ``gamma_source`` per unit mass (default ``gamma``). Costs
    between data channels use the original graph, so the source layer never
    shortcuts them.
    """
    _check_pair(rho0, rho1)
    gamma = _check_gamma(gamma)
    gamma_source = gamma if gamma_source is None else _check_gamma(gamma_source)
    base = cost_matrix_v2(rho0, rho1, gamma)
    sol, cost, side = source_augmented_solve(base, rho0.weights, rho1.weights, gamma_source)
    meta = {"approach": 2, "gamma": gamma, "gamma_source": gamma_source}
    return TransportResult(float(np.sqrt(sol.value)), sol.plan, cost, squared=True, source_side=side, meta=meta)


def unbalanced_vgmm_interpolate(
    rho0, rho1, gamma: float = 1.0, gamma_source: float | None = None, t: float = 0.0, result=None
) -> VectorInterpolant:
    """Interpolant on the source-extended graph; ``source_channel`` marks the source layer.

    Use :meth:`VectorInterpolant.split_source` to separate data channels from
    the source layer.
    """
    _require_models(rho0, rho1)
    if result is None:
        result = unbalanced_vgmm_distance(rho0, rho1, gamma, gamma_source)
    G = with_source_layer(rho0.graph)
    S = rho0.graph.node_count
    c0, c1, P = explicit_source_pair(rho0.components, rho1.components, result.plan.entries, result.source_side, S)
    return interpolant_from_plan(G, c0, c1, P, t, approach=2, source_channel=S)

