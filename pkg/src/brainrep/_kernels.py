"""Hot inner loops: change statistics, Metropolis-Hastings chains, BFS, enumeration.

Every kernel is written as a plain Python function over numpy arrays and then
compiled with numba's @njit when available.  Setting the environment variable
``BRAINREP_NUMBA=0`` (or uninstalling numba) selects the pure-Python path; the
two paths execute the same statements on the same arrays, so results are
bit-identical either way.  ``benchmarks/bench_kernels.py`` measures the gap.

Chain state is carried in five arrays (all indexed by 0-based node ids):

    adj   (n, n) uint8   symmetric 0/1 adjacency, zero diagonal
    deg   (n,)   int64   node degrees
    nbrs  (n, n) int64   per-node neighbor lists; only nbrs[v, :deg[v]] valid
    pos   (n, n) int64   pos[u, v] = index of v in u's neighbor list, -1 if absent
    sp    (n, n) int64   sp[u, v] = number of common neighbors of u and v

Model terms are encoded for the kernels as parallel arrays (see terms.py):
codes[t] is one of the TERM_* constants below, params[t] holds k for
TERM_KDEGREE, and wtabs[t, d] holds the geometric weight of count d for the
geometrically weighted terms.
"""

import math
import os

import numpy as np

TERM_EDGES = 0
TERM_TWOPATH = 1
TERM_KDEGREE = 2
TERM_GWD = 3
TERM_GWESP = 4
TERM_GWNSP = 5
TERM_GWDSP = 6
TERM_NODEMATCH = 7


def _numba_enabled():
    flag = os.environ.get("BRAINREP_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "off", "no"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _numba_enabled()

if NUMBA_ENABLED:
    from numba import njit

    def _jit(fn):
        return njit(cache=True, nogil=True)(fn)
else:

    def _jit(fn):
        return fn


def build_state(adj):
    """Derive (deg, nbrs, pos, sp) from a 0/1 adjacency matrix."""
    adj = np.ascontiguousarray(adj, dtype=np.uint8)
    n = adj.shape[0]
    deg = adj.sum(axis=1).astype(np.int64)
    nbrs = np.full((n, n), -1, dtype=np.int64)
    pos = np.full((n, n), -1, dtype=np.int64)
    for i in range(n):
        nz = np.nonzero(adj[i])[0]
        nbrs[i, : nz.size] = nz
        pos[i, nz] = np.arange(nz.size)
    a = adj.astype(np.int64)
    sp = a @ a
    np.fill_diagonal(sp, 0)
    return adj, deg, nbrs, pos, sp


def _dyad_delta(adj, deg, nbrs, sp, labels, codes, params, wtabs, i, j, out):
    # Statistic change caused by toggling dyad (i, j) at the current state.
    p = codes.shape[0]
    adding = adj[i, j] == 0
    ki = deg[i]
    kj = deg[j]
    sij = sp[i, j]
    for t in range(p):
        c = codes[t]
        if c == TERM_EDGES:
            out[t] = 1.0 if adding else -1.0
        elif c == TERM_TWOPATH:
            out[t] = float(ki + kj) if adding else -float(ki + kj - 2)
        elif c == TERM_KDEGREE:
            k = int(params[t])
            v = 0
            if adding:
                v += (1 if ki + 1 == k else 0) - (1 if ki == k else 0)
                v += (1 if kj + 1 == k else 0) - (1 if kj == k else 0)
            else:
                v += (1 if ki - 1 == k else 0) - (1 if ki == k else 0)
                v += (1 if kj - 1 == k else 0) - (1 if kj == k else 0)
            out[t] = float(v)
        elif c == TERM_GWD:
            if adding:
                out[t] = (wtabs[t, ki + 1] - wtabs[t, ki]) + (
                    wtabs[t, kj + 1] - wtabs[t, kj]
                )
            else:
                out[t] = (wtabs[t, ki - 1] - wtabs[t, ki]) + (
                    wtabs[t, kj - 1] - wtabs[t, kj]
                )
        elif c == TERM_NODEMATCH:
            if labels[i] == labels[j]:
                out[t] = 1.0 if adding else -1.0
            else:
                out[t] = 0.0
        else:
            # Shared-partner terms. The toggled dyad keeps its partner count
            # but switches between the edgewise and non-edgewise pools; every
            # dyad pairing an endpoint with a neighbor of the other endpoint
            # gains/loses one partner.
            acc = 0.0
            if c == TERM_GWESP:
                acc += wtabs[t, sij] if adding else -wtabs[t, sij]
            elif c == TERM_GWNSP:
                acc += -wtabs[t, sij] if adding else wtabs[t, sij]
            step = 1 if adding else -1
            for idx in range(kj):
                k = nbrs[j, idx]
                if k == i:
                    continue
                d0 = sp[i, k]
                dd = wtabs[t, d0 + step] - wtabs[t, d0]
                if c == TERM_GWDSP:
                    acc += dd
                elif c == TERM_GWESP:
                    if adj[i, k] == 1:
                        acc += dd
                else:
                    if adj[i, k] == 0:
                        acc += dd
            for idx in range(ki):
                k = nbrs[i, idx]
                if k == j:
                    continue
                d0 = sp[j, k]
                dd = wtabs[t, d0 + step] - wtabs[t, d0]
                if c == TERM_GWDSP:
                    acc += dd
                elif c == TERM_GWESP:
                    if adj[j, k] == 1:
                        acc += dd
                else:
                    if adj[j, k] == 0:
                        acc += dd
            out[t] = acc


def _apply_toggle(adj, deg, nbrs, pos, sp, i, j):
    # Mutate the chain state by toggling dyad (i, j).
    if adj[i, j] == 0:
        # shared partners first, while the lists still exclude each other
        for idx in range(deg[j]):
            k = nbrs[j, idx]
            sp[i, k] += 1
            sp[k, i] += 1
        for idx in range(deg[i]):
            k = nbrs[i, idx]
            sp[j, k] += 1
            sp[k, j] += 1
        adj[i, j] = 1
        adj[j, i] = 1
        nbrs[i, deg[i]] = j
        pos[i, j] = deg[i]
        deg[i] += 1
        nbrs[j, deg[j]] = i
        pos[j, i] = deg[j]
        deg[j] += 1
    else:
        # drop each endpoint from the other's list (swap with last slot)
        pi = pos[i, j]
        last = deg[i] - 1
        moved = nbrs[i, last]
        nbrs[i, pi] = moved
        pos[i, moved] = pi
        deg[i] = last
        pos[i, j] = -1
        pj = pos[j, i]
        last = deg[j] - 1
        moved = nbrs[j, last]
        nbrs[j, pj] = moved
        pos[j, moved] = pj
        deg[j] = last
        pos[j, i] = -1
        adj[i, j] = 0
        adj[j, i] = 0
        for idx in range(deg[j]):
            k = nbrs[j, idx]
            sp[i, k] -= 1
            sp[k, i] -= 1
        for idx in range(deg[i]):
            k = nbrs[i, idx]
            sp[j, k] -= 1
            sp[k, j] -= 1


dyad_delta = _jit(_dyad_delta)
apply_toggle = _jit(_apply_toggle)


def _all_change_stats(adj, deg, nbrs, sp, labels, codes, params, wtabs, out):
    # Change statistics (with-edge minus without-edge) for every dyad i < j,
    # row order matching numpy's triu_indices.
    n = deg.shape[0]
    p = codes.shape[0]
    delta = np.empty(p, np.float64)
    row = 0
    for i in range(n):
        for j in range(i + 1, n):
            dyad_delta(adj, deg, nbrs, sp, labels, codes, params, wtabs, i, j, delta)
            if adj[i, j] == 1:
                for t in range(p):
                    out[row, t] = -delta[t]
            else:
                for t in range(p):
                    out[row, t] = delta[t]
            row += 1


def _toggle_chain(
    adj,
    deg,
    nbrs,
    pos,
    sp,
    labels,
    codes,
    params,
    wtabs,
    theta,
    cur_stats,
    burn_in,
    thin,
    prop_i,
    prop_j,
    unif,
    out_adj,
    out_stats,
):
    # Metropolis-Hastings over simple graphs with uniform single-dyad toggles.
    # Retains a snapshot (adjacency + running statistic vector) every `thin`
    # proposals once `burn_in` have passed.
    p = theta.shape[0]
    delta = np.empty(p, np.float64)
    total = prop_i.shape[0]
    n_keep = out_adj.shape[0]
    kept = 0
    accepted = 0
    for step in range(total):
        i = prop_i[step]
        j = prop_j[step]
        dyad_delta(adj, deg, nbrs, sp, labels, codes, params, wtabs, i, j, delta)
        logr = 0.0
        for t in range(p):
            logr += theta[t] * delta[t]
        if logr >= 0.0 or unif[step] < math.exp(logr):
            apply_toggle(adj, deg, nbrs, pos, sp, i, j)
            for t in range(p):
                cur_stats[t] += delta[t]
            accepted += 1
        k = step - burn_in + 1
        if k > 0 and k % thin == 0 and kept < n_keep:
            out_adj[kept, :, :] = adj
            for t in range(p):
                out_stats[kept, t] = cur_stats[t]
            kept += 1
    return accepted


def _swap_chain(
    adj,
    deg,
    nbrs,
    pos,
    sp,
    labels,
    codes,
    params,
    wtabs,
    theta,
    cur_stats,
    edge_a,
    edge_b,
    burn_in,
    thin,
    e1_draw,
    e2_draw,
    side,
    unif,
    out_adj,
    out_stats,
):
    # Degree-preserving chain: rewire two disjoint edges (a,b),(c,d) into
    # (a,c),(b,d) (after an orientation flip half the time).  Proposals that
    # share an endpoint or would duplicate an existing edge are rejected.
    p = theta.shape[0]
    delta = np.empty(p, np.float64)
    dsum = np.empty(p, np.float64)
    total = e1_draw.shape[0]
    n_keep = out_adj.shape[0]
    kept = 0
    accepted = 0
    for step in range(total):
        e1 = e1_draw[step]
        e2 = e2_draw[step]
        if e2 >= e1:
            e2 += 1
        a = edge_a[e1]
        b = edge_b[e1]
        c = edge_a[e2]
        d = edge_b[e2]
        if side[step] == 1:
            c, d = d, c
        if (
            a != c
            and a != d
            and b != c
            and b != d
            and adj[a, c] == 0
            and adj[b, d] == 0
        ):
            for t in range(p):
                dsum[t] = 0.0
            dyad_delta(adj, deg, nbrs, sp, labels, codes, params, wtabs, a, b, delta)
            apply_toggle(adj, deg, nbrs, pos, sp, a, b)
            for t in range(p):
                dsum[t] += delta[t]
            dyad_delta(adj, deg, nbrs, sp, labels, codes, params, wtabs, c, d, delta)
            apply_toggle(adj, deg, nbrs, pos, sp, c, d)
            for t in range(p):
                dsum[t] += delta[t]
            dyad_delta(adj, deg, nbrs, sp, labels, codes, params, wtabs, a, c, delta)
            apply_toggle(adj, deg, nbrs, pos, sp, a, c)
            for t in range(p):
                dsum[t] += delta[t]
            dyad_delta(adj, deg, nbrs, sp, labels, codes, params, wtabs, b, d, delta)
            apply_toggle(adj, deg, nbrs, pos, sp, b, d)
            for t in range(p):
                dsum[t] += delta[t]
            logr = 0.0
            for t in range(p):
                logr += theta[t] * dsum[t]
            if logr >= 0.0 or unif[step] < math.exp(logr):
                edge_a[e1] = a
                edge_b[e1] = c
                edge_a[e2] = b
                edge_b[e2] = d
                for t in range(p):
                    cur_stats[t] += dsum[t]
                accepted += 1
            else:
                apply_toggle(adj, deg, nbrs, pos, sp, b, d)
                apply_toggle(adj, deg, nbrs, pos, sp, a, c)
                apply_toggle(adj, deg, nbrs, pos, sp, c, d)
                apply_toggle(adj, deg, nbrs, pos, sp, a, b)
        k = step - burn_in + 1
        if k > 0 and k % thin == 0 and kept < n_keep:
            out_adj[kept, :, :] = adj
            for t in range(p):
                out_stats[kept, t] = cur_stats[t]
            kept += 1
    return accepted


def _bfs_all_pairs(deg, nbrs, dist):
    # Hop distances from every source; -1 marks unreachable pairs.
    n = deg.shape[0]
    queue = np.empty(n, np.int64)
    for s in range(n):
        for v in range(n):
            dist[s, v] = -1
        dist[s, s] = 0
        head = 0
        tail = 1
        queue[0] = s
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[s, u]
            for idx in range(deg[u]):
                w = nbrs[u, idx]
                if dist[s, w] < 0:
                    dist[s, w] = du + 1
                    queue[tail] = w
                    tail += 1


def _gray_enum(
    adj,
    deg,
    nbrs,
    pos,
    sp,
    labels,
    codes,
    params,
    wtabs,
    dy_i,
    dy_j,
    base,
    out,
):
    # Visit every graph on n nodes once by toggling a single dyad per step
    # (Gray-code order); out[mask] receives the statistic vector of the graph
    # whose dyad bitmask is `mask`.  State arrays must describe the empty
    # graph on entry; `base` holds its statistics.
    p = codes.shape[0]
    total = out.shape[0]
    cur = np.empty(p, np.float64)
    delta = np.empty(p, np.float64)
    for t in range(p):
        cur[t] = base[t]
        out[0, t] = base[t]
    mask = 0
    for g in range(1, total):
        b = 0
        gg = g
        while gg & 1 == 0:
            gg >>= 1
            b += 1
        i = dy_i[b]
        j = dy_j[b]
        dyad_delta(adj, deg, nbrs, sp, labels, codes, params, wtabs, i, j, delta)
        apply_toggle(adj, deg, nbrs, pos, sp, i, j)
        for t in range(p):
            cur[t] += delta[t]
        mask ^= 1 << b
        for t in range(p):
            out[mask, t] = cur[t]


all_change_stats = _jit(_all_change_stats)
toggle_chain = _jit(_toggle_chain)
swap_chain = _jit(_swap_chain)
bfs_all_pairs = _jit(_bfs_all_pairs)
gray_enum = _jit(_gray_enum)
