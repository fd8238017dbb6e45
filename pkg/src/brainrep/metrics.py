"""Whole-network assessment metrics for binary connectivity graphs.

The seven-metric profile is (N_c, L, K, C, E_loc, E_glob, R): giant-component
size, harmonic-mean characteristic path length, mean degree, mean clustering
coefficient, mean local efficiency, global efficiency, and degree
assortativity.  Path length uses the harmonic mean over ordered node pairs
with 1/inf = 0, so isolated nodes and disconnected subgraphs are handled
without restricting to the largest component, and E_glob = 1/L whenever L is
finite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGraphError
from .graph import Graph, degree_sequence, giant_component_size

PROFILE_COLUMNS = ("N_c", "L", "K", "C", "E_loc", "E_glob", "R")


@dataclass(frozen=True)
class MetricProfile:
    n_c: int
    l: float | None  # None when the graph has no finite geodesic
    k: float
    c: float
    e_loc: float
    e_glob: float
    r: float | None  # None when assortativity is undefined

    def as_vector(self) -> tuple[float, ...]:
        if self.l is None:
            raise DegenerateGraphError("path length undefined (no finite geodesics)")
        if self.r is None:
            raise DegenerateGraphError("assortativity undefined (zero degree variance)")
        return (float(self.n_c), self.l, self.k, self.c, self.e_loc, self.e_glob, self.r)

    def to_dict(self) -> dict:
        return {
            "N_c": self.n_c,
            "L": self.l,
            "K": self.k,
            "C": self.c,
            "E_loc": self.e_loc,
            "E_glob": self.e_glob,
            "R": self.r,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv_row(self) -> str:
        vals = [self.n_c, self.l, self.k, self.c, self.e_loc, self.e_glob, self.r]
        return ",".join("" if v is None else repr(v) for v in vals)


@dataclass(frozen=True)
class TriadCensus:
    """Node-triple counts by internal edge count."""

    empty: int
    one_edge: int
    two_path: int
    triangle: int

    def total(self) -> int:
        return self.empty + self.one_edge + self.two_path + self.triangle

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.empty, self.one_edge, self.two_path, self.triangle)


@dataclass(frozen=True)
class NodalDistributions:
    """Per-node metric values and their empirical CDFs.

    values maps metric name -> per-node array (path length may contain inf
    for nodes with no finite geodesic); cdf maps metric name ->
    (sorted values, cumulative fractions ending at 1).
    """

    values: dict[str, np.ndarray]
    cdf: dict[str, tuple[np.ndarray, np.ndarray]]


def geodesic_distances(g: Graph) -> np.ndarray:
    """Hop distance matrix; inf for disconnected pairs, 0 diagonal."""
    return g.hop_distances()


def _inverse_distance_sum(dist: np.ndarray) -> float:
    n = dist.shape[0]
    with np.errstate(divide="ignore"):
        inv = 1.0 / dist
    inv[np.arange(n), np.arange(n)] = 0.0
    inv[~np.isfinite(inv)] = 0.0
    return float(inv.sum())


def characteristic_path_length(g: Graph) -> float:
    """Harmonic-mean geodesic distance over ordered pairs (1/inf = 0)."""
    n = g.n
    total = _inverse_distance_sum(geodesic_distances(g))
    if total == 0.0:
        raise DegenerateGraphError("no finite geodesics: path length undefined")
    return n * (n - 1) / total


def global_efficiency(g: Graph) -> float:
    n = g.n
    if n < 2:
        return 0.0
    return _inverse_distance_sum(geodesic_distances(g)) / (n * (n - 1))


def clustering_coefficients(g: Graph) -> tuple[np.ndarray, float]:
    """Per-node Watts-Strogatz clustering and its mean over all nodes."""
    a = g.adjacency_matrix().astype(np.int64)
    deg = a.sum(axis=1)
    sp = a @ a
    triangles2 = (a * sp).sum(axis=1)  # 2 * triangles through each node
    denom = deg * (deg - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(denom > 0, triangles2 / denom, 0.0)
    return c, float(c.mean())


def _subgraph_efficiency(adj: np.ndarray, members: np.ndarray) -> float:
    k = members.size
    if k < 2:
        return 0.0
    sub = adj[np.ix_(members, members)]
    total = 0.0
    for s in range(k):
        dist = np.full(k, -1, dtype=np.int64)
        dist[s] = 0
        frontier = [s]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for v in range(k):
                    if sub[u, v] and dist[v] < 0:
                        dist[v] = d
                        nxt.append(v)
            frontier = nxt
        reach = dist > 0
        if reach.any():
            total += (1.0 / dist[reach]).sum()
    return total / (k * (k - 1))


def local_efficiency(g: Graph) -> tuple[np.ndarray, float]:
    """Per-node efficiency of the neighbor-induced subgraph; 0 when degree < 2."""
    adj = g.adjacency_matrix()
    vals = np.zeros(g.n, dtype=np.float64)
    for i in range(g.n):
        members = np.nonzero(adj[i])[0]
        if members.size >= 2:
            vals[i] = _subgraph_efficiency(adj, members)
    return vals, float(vals.mean())


def assortativity(g: Graph) -> float | None:
    """Degree assortativity (Pearson over edge endpoint degrees).

    Returns None when the denominator is exactly zero (all endpoint degrees
    equal, e.g. regular graphs).  Raises on an edgeless graph.
    """
    if not g.edges:
        raise DegenerateGraphError("assortativity undefined for edgeless graph")
    deg = degree_sequence(g).as_array()
    m = len(g.edges)
    sxy = 0
    ssum = 0
    ssq = 0
    for i, j in g.edges:
        x = int(deg[i])
        y = int(deg[j])
        sxy += x * y
        ssum += x + y
        ssq += x * x + y * y
    # integer-exact rescaling of the edge-sum estimator
    num = 4 * m * sxy - ssum * ssum
    den = 2 * m * ssq - ssum * ssum
    if den == 0:
        return None
    return num / den


def triad_census(g: Graph) -> TriadCensus:
    """Counts of node triples with 0, 1, 2, or 3 internal edges."""
    n = g.n
    if n < 3:
        raise DegenerateGraphError("triad census needs at least 3 nodes")
    a = g.adjacency_matrix().astype(np.int64)
    deg = a.sum(axis=1)
    m = int(deg.sum()) // 2
    sp = a @ a
    triangles = int((a * sp).sum()) // 6
    paths2 = int((deg * (deg - 1) // 2).sum())
    two_path = paths2 - 3 * triangles
    one_edge = m * (n - 2) - 2 * two_path - 3 * triangles
    total = n * (n - 1) * (n - 2) // 6
    empty = total - one_edge - two_path - triangles
    return TriadCensus(empty, one_edge, two_path, triangles)


def metric_profile(g: Graph) -> MetricProfile:
    """Assemble the seven-metric profile; undefined metrics become None."""
    dist = g.hop_distances()
    n = g.n
    inv_sum = _inverse_distance_sum(dist)
    if inv_sum > 0:
        l = n * (n - 1) / inv_sum
        e_glob = inv_sum / (n * (n - 1))
    else:
        l = None
        e_glob = 0.0
    _, c_mean = clustering_coefficients(g)
    _, eloc_mean = local_efficiency(g)
    r = assortativity(g) if g.edges else None
    return MetricProfile(
        n_c=giant_component_size(g),
        l=l,
        k=degree_sequence(g).mean_degree,
        c=c_mean,
        e_loc=eloc_mean,
        e_glob=e_glob,
        r=r,
    )


def _ecdf(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.sort(values)
    frac = np.arange(1, values.size + 1, dtype=np.float64) / values.size
    return order, frac


def nodal_distributions(g: Graph) -> NodalDistributions:
    """Per-node path length, clustering, efficiency values and their CDFs.

    A node's path length is the harmonic-mean distance from it to all others
    (inf if it reaches nothing); its global-efficiency contribution is the
    reciprocal form, which is 0 in that case.
    """
    dist = g.hop_distances()
    n = g.n
    with np.errstate(divide="ignore"):
        inv = 1.0 / dist
    inv[np.arange(n), np.arange(n)] = 0.0
    inv[~np.isfinite(inv)] = 0.0
    row = inv.sum(axis=1)
    with np.errstate(divide="ignore"):
        l_node = np.where(row > 0, (n - 1) / row, np.inf)
    eglob_node = row / (n - 1)
    c_node, _ = clustering_coefficients(g)
    eloc_node, _ = local_efficiency(g)
    values = {
        "L": l_node,
        "C": c_node,
        "E_glob": eglob_node,
        "E_loc": eloc_node,
    }
    cdf = {name: _ecdf(vals) for name, vals in values.items()}
    return NodalDistributions(values=values, cdf=cdf)


def profile_table_csv(rows: list[tuple[str, MetricProfile]]) -> str:
    """CSV table of named profiles with the canonical column order."""
    lines = ["network," + ",".join(PROFILE_COLUMNS)]
    for name, prof in rows:
        lines.append(f"{name},{prof.to_csv_row()}")
    return "\n".join(lines) + "\n"


def nodal_cdf_csv(name: str, nd: NodalDistributions) -> str:
    """Long-format CSV of nodal CDFs (network, metric, value, cum_fraction)."""
    lines = ["network,metric,value,cum_fraction"]
    for metric, (vals, frac) in sorted(nd.cdf.items()):
        for v, f in zip(vals, frac):
            val = "inf" if math.isinf(v) else repr(float(v))
            lines.append(f"{name},{metric},{val},{f!r}")
    return "\n".join(lines) + "\n"
