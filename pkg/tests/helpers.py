"""Random fixtures shared across the test modules."""

import numpy as np

from vgmmot import ChannelGraph, Gaussian, MixtureModel, VectorMixtureModel


def rand_gaussian(rng, dim):
    A = rng.normal(scale=0.7, size=(dim, dim))
    return Gaussian(rng.uniform(-3, 3, size=dim), A @ A.T + 0.2 * np.eye(dim))


def rand_weights(rng, n, mass=1.0):
    w = rng.dirichlet(np.ones(n)) * mass
    w = np.maximum(w, 1e-3)
    return w * (mass / w.sum())


def rand_gmm(rng, dim, n, mass=1.0):
    return MixtureModel(rand_weights(rng, n, mass), [rand_gaussian(rng, dim) for _ in range(n)])


def rand_graph(rng, M):
    """Random connected graph: a random spanning tree plus a few extra edges."""
    order = rng.permutation(M)
    edges = {tuple(sorted((int(order[k]), int(order[rng.integers(k)])))) for k in range(1, M)}
    for u in range(M):
        for w in range(u + 1, M):
            if rng.random() < 0.25:
                edges.add((u, w))
    return ChannelGraph(M, sorted(edges))


def rand_vgmm(rng, graph, dim, n, mass=1.0):
    return VectorMixtureModel(
        graph,
        rand_weights(rng, n, mass),
        [rand_gaussian(rng, dim) for _ in range(n)],
        rng.integers(graph.node_count, size=n),
    )


def g1(mean, var=1.0):
    return Gaussian([float(mean)], [[float(var)]])
