"""Matching graph of a graph-like DEM and exact minimum-weight matching."""

from __future__ import annotations

import math
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .. import kernels
from ..refdem.model import DEM, weight_of

# above this many defects the subset DP gives way to blossom matching
DP_LIMIT = 12


class DisconnectedDefect(ValueError):
    pass


@dataclass
class Edge:
    u: int
    v: int  # == boundary for boundary edges
    weight: float
    observables: int  # bitmask
    probability: float


class MatchingGraph:
    """Detectors ``0..D-1`` plus a boundary node ``D``.

    Weights are ``ln((1 - p) / p)`` clamped at 0 from below, so ``p >= 1/2``
    gives a free edge. When two mechanisms join the same node pair with
    different observable masks only the more likely one is kept (the other
    can never be part of a minimum-weight path).
    """

    def __init__(self, dem: DEM):
        if not dem.is_graphlike():
            raise ValueError("DEM has hyperedges; run decompose_hyperedges first")
        self.detector_count = D = dem.detector_count
        self.observable_count = dem.observable_count
        self.boundary = D
        best: dict[tuple[int, int], Edge] = {}
        self.clamped = 0
        self.dropped_parallel = 0
        for m in dem:
            if not m.detectors:
                continue
            u = m.detectors[0]
            v = m.detectors[1] if len(m.detectors) == 2 else D
            w = weight_of(m.probability)
            if w < 0:
                w = 0.0
                self.clamped += 1
            e = Edge(u, v, w, sum(1 << o for o in m.observables), m.probability)
            old = best.get((u, v))
            if old is None:
                best[(u, v)] = e
            else:
                self.dropped_parallel += 1
                if e.probability > old.probability:
                    best[(u, v)] = e
        self.edges = [best[k] for k in sorted(best)]
        n = D + 1
        rows = [e.u for e in self.edges] + [e.v for e in self.edges]
        cols = [e.v for e in self.edges] + [e.u for e in self.edges]
        # zero weights would vanish from a sparse matrix; a tiny floor keeps them
        vals = [max(e.weight, 1e-300) for e in self.edges] * 2
        self._adj = csr_matrix((vals, (rows, cols)), shape=(n, n))
        self._obs = {}
        for e in self.edges:
            self._obs[(e.u, e.v)] = e.observables
            self._obs[(e.v, e.u)] = e.observables

    @property
    def node_count(self) -> int:
        return self.detector_count + 1

    def boundary_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.v == self.boundary]

    def shortest_paths(self, sources):
        """Distances and path observable masks from each source to every node."""
        sources = np.asarray(sources, dtype=np.int64)
        dist, pred = dijkstra(self._adj, directed=False, indices=sources, return_predecessors=True)
        masks = np.zeros(dist.shape, dtype=np.int64)
        obs = self._obs
        for r in range(len(sources)):
            pr = pred[r].tolist()
            mr = [0] * len(pr)
            done = [False] * len(pr)
            done[int(sources[r])] = True
            for node in range(len(pr)):
                if done[node] or pr[node] < 0:
                    continue
                chain = []
                x = node
                while not done[x] and pr[x] >= 0:
                    chain.append(x)
                    x = pr[x]
                for y in reversed(chain):
                    mr[y] = mr[pr[y]] ^ obs[(pr[y], y)]
                    done[y] = True
            masks[r] = mr
        return dist, masks

    def edge_count(self) -> int:
        return len(self.edges)


def build_matching_graph(dem: DEM) -> MatchingGraph:
    return MatchingGraph(dem)


def _match(dist: np.ndarray, bdist: np.ndarray):
    k = len(bdist)
    if k <= DP_LIMIT:
        return kernels.match_dp(np.ascontiguousarray(dist, dtype=np.float64), np.ascontiguousarray(bdist, dtype=np.float64))
    # blossom on a doubled graph: each defect has a private boundary twin and
    # twins are joined at zero cost so unused ones pair up among themselves
    g = nx.Graph()
    big = 1.0 + 2.0 * (float(np.nansum(np.where(np.isfinite(dist), dist, 0))) + float(np.nansum(np.where(np.isfinite(bdist), bdist, 0))))
    for i in range(k):
        if math.isfinite(bdist[i]):
            g.add_edge(("d", i), ("b", i), weight=big - bdist[i])
        for j in range(i + 1, k):
            if math.isfinite(dist[i, j]):
                g.add_edge(("d", i), ("d", j), weight=big - dist[i, j])
            g.add_edge(("b", i), ("b", j), weight=big)
    matching = nx.max_weight_matching(g, maxcardinality=True)
    partner = np.full(k, -1, dtype=np.int64)
    total = 0.0
    for a, b in matching:
        if a[0] == "d" and b[0] == "d":
            partner[a[1]], partner[b[1]] = b[1], a[1]
            total += dist[a[1], b[1]]
        elif a[0] != b[0]:
            i = a[1] if a[0] == "d" else b[1]
            total += bdist[i]
    return partner, total


def decode_shot(graph: MatchingGraph, syndrome, return_weight: bool = False):
    """Predicted observable flips (bool array) for one syndrome.

    Exact minimum-weight matching of the flagged detectors, with the boundary
    absorbing any of them; pair costs are shortest-path lengths.
    """
    syndrome = np.asarray(syndrome, dtype=bool)
    if syndrome.shape != (graph.detector_count,):
        raise ValueError(f"syndrome has {syndrome.shape} bits, graph {graph.detector_count} detectors")
    defects = np.flatnonzero(syndrome)
    pred = np.zeros(graph.observable_count, dtype=bool)
    if len(defects) == 0:
        return (pred, 0.0) if return_weight else pred
    dist, masks = graph.shortest_paths(defects)
    sub = dist[:, defects]
    bd = dist[:, graph.boundary]
    for r, d in enumerate(defects):
        others = np.delete(sub[r], r)
        if not math.isfinite(bd[r]) and not np.isfinite(others).any():
            raise DisconnectedDefect(f"flagged detector D{d} cannot reach any defect or the boundary")
    partner, total = _match(sub, bd)
    if not math.isfinite(total):
        raise DisconnectedDefect("no perfect matching of the flagged detectors exists")
    mask = 0
    for r in range(len(defects)):
        j = partner[r]
        if j < 0:
            mask ^= int(masks[r, graph.boundary])
        elif j > r:
            mask ^= int(masks[r, defects[j]])
    for o in range(graph.observable_count):
        pred[o] = bool(mask >> o & 1)
    return (pred, float(total)) if return_weight else pred


def brute_force_decode(graph: MatchingGraph, syndrome, return_weight: bool = False, max_defects: int = 10):
    """Exhaustive matching over all pairings (independent of :func:`decode_shot`).

    All-pairs shortest paths by Floyd-Warshall in plain Python (tracking the
    observable mask of each best path), then recursion over every way to pair
    the defects or send them to the boundary. Among equal-weight matchings the
    first found in the recursion order is returned.
    """
    syndrome = np.asarray(syndrome, dtype=bool)
    defects = [int(i) for i in np.flatnonzero(syndrome)]
    if len(defects) > max_defects:
        raise MemoryError(f"{len(defects)} defects exceed the brute-force limit of {max_defects}")
    pred = np.zeros(graph.observable_count, dtype=bool)
    if not defects:
        return (pred, 0.0) if return_weight else pred
    n = graph.node_count
    inf = math.inf
    dist = [[inf] * n for _ in range(n)]
    obs = [[0] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0.0
    for e in graph.edges:
        if e.weight < dist[e.u][e.v]:
            dist[e.u][e.v] = dist[e.v][e.u] = e.weight
            obs[e.u][e.v] = obs[e.v][e.u] = e.observables
    for k in range(n):
        dk, ok = dist[k], obs[k]
        for i in range(n):
            dik = dist[i][k]
            if dik == inf:
                continue
            di, oi = dist[i], obs[i]
            oik = oi[k]
            for j in range(n):
                c = dik + dk[j]
                if c < di[j]:
                    di[j] = c
                    oi[j] = oik ^ ok[j]
    B = graph.boundary
    best = [inf, 0]

    def rec(rest, acc_w, acc_m):
        if acc_w >= best[0]:
            return
        if not rest:
            best[0], best[1] = acc_w, acc_m
            return
        a, tail = rest[0], rest[1:]
        rec(tail, acc_w + dist[a][B], acc_m ^ obs[a][B])
        for k, b in enumerate(tail):
            rec(tail[:k] + tail[k + 1:], acc_w + dist[a][b], acc_m ^ obs[a][b])

    rec(defects, 0.0, 0)
    if best[0] == inf:
        raise DisconnectedDefect("no perfect matching of the flagged detectors exists")
    for o in range(graph.observable_count):
        pred[o] = bool(best[1] >> o & 1)
    return (pred, best[0]) if return_weight else pred
