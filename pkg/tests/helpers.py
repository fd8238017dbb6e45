"""Shared fixtures and independent brute-force oracles for the test suite.

The oracles deliberately avoid the package's numpy/kernel code paths: they
work on python sets and dicts so a kernel bug cannot hide in both routes.
"""

import itertools

import numpy as np

from brainrep.graph import Graph


def random_graph(rng, n, p_edge=None):
    if p_edge is None:
        p_edge = rng.random()
    edges = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < p_edge
    ]
    return Graph.from_edges(n, edges)


def neighbor_sets(g):
    nbrs = {v: set() for v in range(g.n)}
    for i, j in g.edges:
        nbrs[i].add(j)
        nbrs[j].add(i)
    return nbrs


def brute_shared_partners(g):
    """(esp, nsp, dsp) lists indexed by shared-partner count, 0..n-2."""
    nbrs = neighbor_sets(g)
    bins = max(g.n - 1, 0)
    esp = [0] * bins
    nsp = [0] * bins
    for i in range(g.n):
        for j in range(i + 1, g.n):
            common = len(nbrs[i] & nbrs[j])
            if (i, j) in g.edges:
                esp[common] += 1
            else:
                nsp[common] += 1
    dsp = [e + s for e, s in zip(esp, nsp)]
    return esp, nsp, dsp


def floyd_warshall(g):
    n = g.n
    dist = [[float("inf")] * n for _ in range(n)]
    for v in range(n):
        dist[v][v] = 0.0
    for i, j in g.edges:
        dist[i][j] = 1.0
        dist[j][i] = 1.0
    for k in range(n):
        for i in range(n):
            dik = dist[i][k]
            if dik == float("inf"):
                continue
            for j in range(n):
                alt = dik + dist[k][j]
                if alt < dist[i][j]:
                    dist[i][j] = alt
    return dist


def flood_fill_components(g):
    nbrs = neighbor_sets(g)
    seen = set()
    sizes = []
    for start in range(g.n):
        if start in seen:
            continue
        stack = [start]
        comp = set()
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(nbrs[v] - comp)
        seen |= comp
        sizes.append(len(comp))
    return sorted(sizes, reverse=True)


def pearson_assortativity(g):
    """Plain Pearson correlation over the 2|E| ordered endpoint-degree pairs."""
    nbrs = neighbor_sets(g)
    deg = {v: len(nbrs[v]) for v in range(g.n)}
    xs, ys = [], []
    for i, j in g.edges:
        xs += [deg[i], deg[j]]
        ys += [deg[j], deg[i]]
    x = np.array(xs, dtype=float)
    y = np.array(ys, dtype=float)
    vx = ((x - x.mean()) ** 2).mean()
    vy = ((y - y.mean()) ** 2).mean()
    if vx == 0 or vy == 0:
        return None
    return float(((x - x.mean()) * (y - y.mean())).mean() / np.sqrt(vx * vy))


def brute_triad_census(g):
    counts = [0, 0, 0, 0]
    for triple in itertools.combinations(range(g.n), 3):
        k = sum(
            1
            for a, b in itertools.combinations(triple, 2)
            if (a, b) in g.edges
        )
        counts[k] += 1
    return tuple(counts)


def brute_two_paths(g):
    nbrs = neighbor_sets(g)
    total = 0
    for v in range(g.n):
        k = len(nbrs[v])
        total += k * (k - 1) // 2
    return total


def search_six_node_graph(esp_target, nsp_target, n_edges=8):
    """Exhaustive search over all 6-node graphs with the given edge count for
    one whose shared-partner distributions match the targets."""
    dyads = list(itertools.combinations(range(6), 2))
    for edge_set in itertools.combinations(dyads, n_edges):
        g = Graph.from_edges(6, edge_set)
        esp, nsp, _ = brute_shared_partners(g)
        if tuple(esp[:5]) == esp_target and tuple(nsp[:5]) == nsp_target:
            return g
    return None
