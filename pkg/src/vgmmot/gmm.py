"""Transport between (scalar) Gaussian mixtures, balanced and unbalanced."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, UnbalancedInputError
from .gaussian import gaussian_interpolate, w2_squared
from .graph import ChannelGraph
from .models import MixtureModel, TransportResult
from .transport import solve_transport
from .vector import _check_gamma, explicit_source_pair, interpolant_from_plan, source_augmented_solve


def _check_dims(mu0: MixtureModel, mu1: MixtureModel):
    if mu0.dim != mu1.dim:
        raise DimensionMismatchError(f"mixtures have dimensions {mu0.dim} and {mu1.dim}")


def gaussian_cost_matrix(mu0: MixtureModel, mu1: MixtureModel) -> np.ndarray:
    """Squared W2 between every pair of components."""
    _check_dims(mu0, mu1)
    return np.array([[w2_squared(g0, g1) for g1 in mu1.gaussians] for g0 in mu0.gaussians]).reshape(len(mu0), len(mu1))


def gmm_distance(mu0: MixtureModel, mu1: MixtureModel) -> TransportResult:
    for mu in (mu0, mu1):
        if not mu.is_balanced():
            raise UnbalancedInputError(
                f"mixture has total mass {mu.mass!r}, expected 1; use unbalanced_gmm_distance for unequal masses"
            )
    cost = gaussian_cost_matrix(mu0, mu1)
    sol = solve_transport(cost, mu0.weights, mu1.weights)
    return TransportResult(float(np.sqrt(sol.value)), sol.plan, cost, squared=True)


def gmm_interpolate(mu0: MixtureModel, mu1: MixtureModel, t: float, result: TransportResult | None = None) -> MixtureModel:
    """Mixture at time ``t`` on the geodesic: one component per positive plan entry."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if result is None:
        result = gmm_distance(mu0, mu1)
    P = result.plan.entries
    comps = [(P[i, j], gaussian_interpolate(mu0.gaussians[i], mu1.gaussians[j], t)) for i, j in zip(*np.nonzero(P > 0))]
    return MixtureModel.from_components(comps, dim=mu0.dim)


def unbalanced_gmm_distance(mu0: MixtureModel, mu1: MixtureModel, gamma: float) -> TransportResult:
    """Distance with an implicit source node on the lighter side.

    Each unit of created or destroyed mass costs ``gamma`` in the squared
    objective, the same units as the squared W2 entries.
    """
    _check_dims(mu0, mu1)
    gamma = _check_gamma(gamma)
    mu0.require_positive_mass()
    mu1.require_positive_mass()
    sol, cost, side = source_augmented_solve(gaussian_cost_matrix(mu0, mu1), mu0.weights, mu1.weights, gamma)
    return TransportResult(float(np.sqrt(sol.value)), sol.plan, cost, squared=True, source_side=side, meta={"gamma": gamma})


_TWO_LAYER = ChannelGraph(2, [(0, 1)])


def unbalanced_gmm_interpolate(
    mu0: MixtureModel, mu1: MixtureModel, gamma: float, t: float, result: TransportResult | None = None
):
    """Returns ``(original, source)`` mixtures at time ``t``.

    The implicit source node is made explicit as copies of the partner
    Gaussians in a second layer; created mass moves from the source layer into
    the data layer over time, destroyed mass the other way.
    """
    if result is None:
        result = unbalanced_gmm_distance(mu0, mu1, gamma)
    comps0 = [(w, g, 0) for w, g in mu0.components]
    comps1 = [(w, g, 0) for w, g in mu1.components]
    c0, c1, P = explicit_source_pair(comps0, comps1, result.plan.entries, result.source_side, 1)
    rho_t = interpolant_from_plan(_TWO_LAYER, c0, c1, P, t, approach=2, source_channel=1)
    original, source = rho_t.split_source()
    return (
        MixtureModel.from_components([(w, g) for w, g, _ in original], dim=mu0.dim),
        MixtureModel.from_components([(w, g) for w, g, _ in source], dim=mu0.dim),
    )
