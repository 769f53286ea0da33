"""Channel graph: shortest paths, positions along paths, and channel vectors."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ModelValidationError

PATH_RTOL = 1e-12


class ChannelGraph:
    """Connected undirected graph on nodes ``0..M-1`` with positive edge lengths."""

    def __init__(self, node_count: int, edges=(), lengths=None):
        M = int(node_count)
        if M < 1:
            raise ModelValidationError("graph needs at least one node")
        edges = [tuple(int(x) for x in e) for e in edges]
        if lengths is None:
            lengths = [1.0] * len(edges)
        lengths = [float(x) for x in lengths]
        if len(lengths) != len(edges):
            raise ModelValidationError("lengths must be parallel to edges")
        self.node_count = M
        self._len = {}
        self._adj = [dict() for _ in range(M)]
        for (u, w), length in zip(edges, lengths):
            if u == w:
                raise ModelValidationError(f"self-loop at node {u}")
            if not (0 <= u < M and 0 <= w < M):
                raise ModelValidationError(f"edge ({u}, {w}) references a node outside 0..{M - 1}")
            if not (length > 0 and math.isfinite(length)):
                raise ModelValidationError(f"edge ({u}, {w}) has non-positive length {length}")
            key = (min(u, w), max(u, w))
            if key in self._len:
                raise ModelValidationError(f"duplicate edge {key}")
            self._len[key] = length
            self._adj[u][w] = length
            self._adj[w][u] = length
        if not self._is_connected():
            raise ModelValidationError("channel graph must be connected")

    @property
    def edges(self):
        return sorted(self._len)

    def edge_length(self, u: int, w: int) -> float:
        return self._len[(min(u, w), max(u, w))]

    def has_edge(self, u: int, w: int) -> bool:
        return (min(u, w), max(u, w)) in self._len

    def neighbors(self, u: int):
        return sorted(self._adj[u])

    def _is_connected(self):
        seen = {0}
        stack = [0]
        while stack:
            for w in self._adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.node_count

    def _check_node(self, u):
        if not (isinstance(u, (int, np.integer)) and 0 <= u < self.node_count):
            raise ModelValidationError(f"invalid node {u!r} for a graph with {self.node_count} nodes")

    def _dijkstra(self, source: int) -> np.ndarray:
        dist = np.full(self.node_count, np.inf)
        dist[source] = 0.0
        heap = [(0.0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for w, length in self._adj[u].items():
                nd = d + length
                if nd < dist[w]:
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
        return dist

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs shortest-path lengths."""
        D = np.vstack([self._dijkstra(u) for u in range(self.node_count)])
        D = np.minimum(D, D.T)
        D.setflags(write=False)
        return D

    def distance(self, u: int, w: int) -> float:
        self._check_node(u)
        self._check_node(w)
        return float(self.distances[u, w])

    def shortest_path(self, u: int, w: int):
        """Shortest path from ``u`` to ``w``; ties go to the lexicographically smallest node sequence."""
        self._check_node(u)
        self._check_node(w)
        to_goal = self.distances[:, w]
        path = [u]
        node = u
        while node != w:
            remaining = to_goal[node]
            tol = PATH_RTOL * max(1.0, remaining)
            node = min(
                x for x, length in self._adj[node].items() if abs(length + to_goal[x] - remaining) <= tol
            )
            path.append(node)
        return float(to_goal[u]), path

    def to_json(self) -> dict:
        edges = self.edges
        out = {"nodes": self.node_count, "edges": [list(e) for e in edges]}
        lengths = [self._len[e] for e in edges]
        if any(x != 1.0 for x in lengths):
            out["lengths"] = lengths
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ChannelGraph":
        return cls(data["nodes"], data.get("edges", []), data.get("lengths"))

    @classmethod
    def chain(cls, M: int) -> "ChannelGraph":
        return cls(M, [(k, k + 1) for k in range(M - 1)])

    @classmethod
    def complete(cls, M: int) -> "ChannelGraph":
        return cls(M, [(u, w) for u in range(M) for w in range(u + 1, M)])

    def __eq__(self, other):
        if not isinstance(other, ChannelGraph):
            return NotImplemented
        return self.node_count == other.node_count and self._len == other._len

    def __hash__(self):
        return hash((self.node_count, tuple(sorted(self._len.items()))))

    def __repr__(self):
        return f"ChannelGraph({self.node_count}, edges={self.edges})"


def shortest_path(G: ChannelGraph, u: int, w: int):
    return G.shortest_path(u, w)


@dataclass(frozen=True)
class GraphPosition:
    """A point ``(1 - fraction) * node_a + fraction * node_b`` on the graph.

    Pure nodes have ``node_a == node_b`` and fraction 0. ``direct`` marks a blend
    of two arbitrary (possibly non-adjacent) nodes, which only straight-line
    channel interpolation produces.
    """

    node_a: int
    node_b: int
    fraction: float = 0.0
    direct: bool = False

    def __post_init__(self):
        f = float(self.fraction)
        if not 0.0 <= f <= 1.0:
            raise ModelValidationError(f"fraction must be in [0, 1], got {f}")
        a, b = int(self.node_a), int(self.node_b)
        if f == 1.0:
            a, f = b, 0.0
        if f == 0.0:
            b = a
        object.__setattr__(self, "node_a", a)
        object.__setattr__(self, "node_b", b)
        object.__setattr__(self, "fraction", f)

    @classmethod
    def node(cls, k: int) -> "GraphPosition":
        return cls(k, k, 0.0)

    @property
    def is_node(self) -> bool:
        return self.node_a == self.node_b

    def anchors(self):
        """(node, weight) pairs of the channel blend."""
        if self.is_node:
            return [(self.node_a, 1.0)]
        return [(self.node_a, 1.0 - self.fraction), (self.node_b, self.fraction)]

    def validate(self, G: ChannelGraph):
        G._check_node(self.node_a)
        G._check_node(self.node_b)
        if not self.is_node and not self.direct and not G.has_edge(self.node_a, self.node_b):
            raise ModelValidationError(f"nodes {self.node_a} and {self.node_b} are not adjacent")


def path_interpolate(path, t: float, graph: ChannelGraph | None = None) -> GraphPosition:
    """Position at arc length ``t * L`` along ``path`` (``L`` its total length).

    Without ``graph`` every step has unit length and adjacency is not checked.
    """
    path = [int(x) for x in path]
    if not path:
        raise ModelValidationError("path is empty")
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    steps = list(zip(path[:-1], path[1:]))
    if graph is not None:
        for x, y in steps:
            if not graph.has_edge(x, y):
                raise ModelValidationError(f"path step {x}->{y} is not an edge")
    if len(path) == 1 or t == 0.0:
        return GraphPosition.node(path[0])
    if t == 1.0:
        return GraphPosition.node(path[-1])
    lengths = [1.0 if graph is None else graph.edge_length(x, y) for x, y in steps]
    target = t * sum(lengths)
    walked = 0.0
    for k, length in enumerate(lengths):
        if target < walked + length or k == len(lengths) - 1:
            frac = min(max((target - walked) / length, 0.0), 1.0)
            return GraphPosition(path[k], path[k + 1], frac)
        walked += length
    raise AssertionError("unreachable")


def delta_vector(pos: GraphPosition, M: int) -> np.ndarray:
    """Channel weights of a position: a probability vector of length ``M``."""
    if not (0 <= pos.node_a < M and 0 <= pos.node_b < M):
        raise ModelValidationError(f"position {pos} out of range for {M} channels")
    out = np.zeros(M)
    for k, w in pos.anchors():
        out[k] += w
    return out


def position_distance(G: ChannelGraph, p: GraphPosition, q: GraphPosition) -> float:
    """Length of the shortest route between two points of the graph, edges taken as segments.

    Agrees with the node metric on pure nodes, and with arc-length difference
    for two points on a common shortest path.
    """
    for pos in (p, q):
        if pos.direct and not pos.is_node:
            raise ModelValidationError("direct (non-path) channel blends have no graph distance")
        pos.validate(G)

    def offsets(pos):
        if pos.is_node:
            return [(pos.node_a, 0.0)]
        length = G.edge_length(pos.node_a, pos.node_b)
        return [(pos.node_a, pos.fraction * length), (pos.node_b, (1.0 - pos.fraction) * length)]

    D = G.distances
    best = min(op + D[x, y] + oq for x, op in offsets(p) for y, oq in offsets(q))
    if not p.is_node and not q.is_node and {p.node_a, p.node_b} == {q.node_a, q.node_b}:
        fq = q.fraction if q.node_a == p.node_a else 1.0 - q.fraction
        best = min(best, abs(p.fraction - fq) * G.edge_length(p.node_a, p.node_b))
    return float(best)
