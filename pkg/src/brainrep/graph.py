"""Undirected simple graphs: construction, mutation, components, shared partners, I/O.

Node ids are 0-based consecutive integers.  Edge-list files carry a header
line ``n=<count>`` (optionally ``n=<count> base=1`` for 1-based files, which
are normalized on load), then one ``i j`` pair per line; ``#`` starts a
comment.  Node-attribute files are two-column CSV ``node_id,label`` with a
header row.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._kernels import bfs_all_pairs, build_state
from .errors import EdgeListParseError, InvalidDyadError, NotGraphicalError

Edge = tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph on n labeled nodes."""

    n: int
    edges: frozenset[Edge]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        for i, j in self.edges:
            if i == j:
                raise InvalidDyadError(f"self-loop at node {i}")
            if not (0 <= i < j < self.n):
                raise InvalidDyadError(f"edge ({i}, {j}) outside [0, {self.n})")

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        norm = frozenset((i, j) if i < j else (j, i) for i, j in edges)
        return cls(n, norm)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, frozenset())

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls.from_edges(n, ((i, j) for i in range(n) for j in range(i + 1, n)))

    @classmethod
    def from_adjacency(cls, adj) -> "Graph":
        adj = np.asarray(adj)
        n = adj.shape[0]
        iu, ju = np.nonzero(np.triu(adj, 1))
        return cls(n, frozenset(zip(iu.tolist(), ju.tolist())))

    @property
    def number_of_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return ((i, j) if i < j else (j, i)) in self.edges

    def neighbors(self, i: int) -> tuple[int, ...]:
        return tuple(int(v) for v in np.nonzero(self.adjacency_matrix()[i])[0])

    @cached_property
    def _adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.uint8)
        for i, j in self.edges:
            a[i, j] = 1
            a[j, i] = 1
        a.setflags(write=False)
        return a

    def adjacency_matrix(self) -> np.ndarray:
        """Read-only symmetric 0/1 matrix."""
        return self._adjacency

    def kernel_state(self):
        """Fresh (adj, deg, nbrs, pos, sp) arrays for the chain kernels."""
        return build_state(self._adjacency.copy())

    def hop_distances(self) -> np.ndarray:
        """All-pairs hop distances as float64, inf for unreachable pairs."""
        _, deg, nbrs, _, _ = self.kernel_state()
        dist = np.empty((self.n, self.n), dtype=np.int64)
        bfs_all_pairs(deg, nbrs, dist)
        out = dist.astype(np.float64)
        out[dist < 0] = np.inf
        return out


@dataclass(frozen=True)
class NodeAttributes:
    """One categorical label per node (e.g. anatomical lobe)."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("empty attribute list")

    @property
    def n(self) -> int:
        return len(self.labels)

    def codes(self) -> np.ndarray:
        """Integer codes, stable under label-set ordering."""
        mapping = {lab: k for k, lab in enumerate(sorted(set(self.labels)))}
        return np.array([mapping[lab] for lab in self.labels], dtype=np.int64)


@dataclass(frozen=True)
class DegreeSequence:
    degrees: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def mean_degree(self) -> float:
        return float(sum(self.degrees)) / len(self.degrees)

    def as_array(self) -> np.ndarray:
        return np.array(self.degrees, dtype=np.int64)

    def is_graphical(self) -> bool:
        """Erdos-Gallai test for realizability by a simple graph."""
        d = sorted(self.degrees, reverse=True)
        n = len(d)
        if any(x < 0 or x > n - 1 for x in d):
            return False
        if sum(d) % 2 != 0:
            return False
        prefix = np.cumsum(d)
        for k in range(1, n + 1):
            rhs = k * (k - 1) + sum(min(x, k) for x in d[k:])
            if prefix[k - 1] > rhs:
                return False
        return True


@dataclass(frozen=True)
class SharedPartnerDistributions:
    """Dyad counts by number of common neighbors, split by edge status.

    Index i of each array counts dyads with exactly i shared partners,
    i = 0..n-2; esp covers connected pairs, nsp non-connected pairs, and
    dsp all pairs (dsp = esp + nsp bin by bin).
    """

    esp: np.ndarray
    nsp: np.ndarray
    dsp: np.ndarray


def toggle_edge(g: Graph, i: int, j: int) -> Graph:
    """Return g with dyad (i, j) flipped; everything else unchanged."""
    if i == j:
        raise InvalidDyadError(f"self-loop at node {i}")
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise InvalidDyadError(f"dyad ({i}, {j}) outside [0, {g.n})")
    e = (i, j) if i < j else (j, i)
    if e in g.edges:
        return Graph(g.n, g.edges - {e})
    return Graph(g.n, g.edges | {e})


def degree_sequence(g: Graph) -> DegreeSequence:
    counts = [0] * g.n
    for i, j in g.edges:
        counts[i] += 1
        counts[j] += 1
    return DegreeSequence(tuple(counts))


def giant_component_size(g: Graph) -> int:
    """Size of the largest connected component; an isolated node counts as 1."""
    dist = g.hop_distances()
    return int(np.isfinite(dist).sum(axis=1).max())


def component_sizes(g: Graph) -> list[int]:
    """All component sizes, largest first."""
    dist = g.hop_distances()
    seen = np.zeros(g.n, dtype=bool)
    sizes = []
    for s in range(g.n):
        if seen[s]:
            continue
        members = np.isfinite(dist[s])
        seen |= members
        sizes.append(int(members.sum()))
    return sorted(sizes, reverse=True)


def shared_partner_distributions(g: Graph) -> SharedPartnerDistributions:
    n = g.n
    bins = max(n - 1, 0)
    a = g.adjacency_matrix().astype(np.int64)
    sp = a @ a
    iu, ju = np.triu_indices(n, 1)
    counts = sp[iu, ju]
    on_edge = a[iu, ju] == 1
    esp = np.bincount(counts[on_edge], minlength=bins).astype(np.int64)
    nsp = np.bincount(counts[~on_edge], minlength=bins).astype(np.int64)
    return SharedPartnerDistributions(esp=esp, nsp=nsp, dsp=esp + nsp)


def havel_hakimi(seq: DegreeSequence) -> Graph:
    """Deterministic realization of a graphical degree sequence.

    Repeatedly connects the node with the largest remaining degree to the
    next-largest ones (ties broken by node id).
    """
    if not seq.is_graphical():
        raise NotGraphicalError(f"degree sequence {seq.degrees} is not graphical")
    n = seq.n
    remaining = [[d, v] for v, d in enumerate(seq.degrees)]
    edges = []
    for _ in range(n):
        remaining.sort(key=lambda t: (-t[0], t[1]))
        d, v = remaining[0]
        if d == 0:
            break
        remaining[0][0] = 0
        for k in range(1, d + 1):
            remaining[k][0] -= 1
            edges.append((v, remaining[k][1]))
    return Graph.from_edges(n, edges)


def _parse_header(line: str, line_no: int) -> tuple[int, int]:
    parts = line.split()
    if not parts or not parts[0].startswith("n="):
        raise EdgeListParseError(line_no, f"expected 'n=<count>' header, got {line!r}")
    try:
        n = int(parts[0][2:])
    except ValueError:
        raise EdgeListParseError(line_no, f"bad node count in {parts[0]!r}") from None
    if n < 1:
        raise EdgeListParseError(line_no, f"node count must be >= 1, got {n}")
    base = 0
    for tok in parts[1:]:
        if tok.startswith("base="):
            try:
                base = int(tok[5:])
            except ValueError:
                raise EdgeListParseError(line_no, f"bad base flag {tok!r}") from None
            if base not in (0, 1):
                raise EdgeListParseError(line_no, f"base must be 0 or 1, got {base}")
        else:
            raise EdgeListParseError(line_no, f"unrecognized header token {tok!r}")
    return n, base


def load_graph(source) -> Graph:
    """Read an edge-list file (path, or open text stream)."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8") as fh:
            return load_graph(fh)
    n = None
    base = 0
    edges: set[Edge] = set()
    for line_no, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            n, base = _parse_header(line, line_no)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(line_no, f"expected two node ids, got {line!r}")
        try:
            i, j = int(parts[0]) - base, int(parts[1]) - base
        except ValueError:
            raise EdgeListParseError(line_no, f"non-integer node id in {line!r}") from None
        if i == j:
            raise EdgeListParseError(line_no, f"self-loop at node {parts[0]}")
        if not (0 <= i < n and 0 <= j < n):
            raise EdgeListParseError(line_no, f"node id out of range in {line!r}")
        e = (i, j) if i < j else (j, i)
        if e in edges:
            raise EdgeListParseError(line_no, f"duplicate edge {line!r}")
        edges.add(e)
    if n is None:
        raise EdgeListParseError(0, "missing 'n=<count>' header")
    return Graph(n, frozenset(edges))


def save_graph(g: Graph, target) -> None:
    """Write an edge-list file loadable by load_graph (0-based, sorted)."""
    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", encoding="utf-8") as fh:
            save_graph(g, fh)
        return
    target.write(f"n={g.n}\n")
    for i, j in sorted(g.edges):
        target.write(f"{i} {j}\n")


def graph_to_text(g: Graph) -> str:
    buf = io.StringIO()
    save_graph(g, buf)
    return buf.getvalue()


def load_node_attributes(source, n: int | None = None) -> NodeAttributes:
    """Read a node_id,label CSV (header row required)."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8") as fh:
            return load_node_attributes(fh, n)
    rows: dict[int, str] = {}
    header_seen = False
    for line_no, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            header_seen = True
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise EdgeListParseError(line_no, f"expected 'node_id,label', got {line!r}")
        try:
            node = int(parts[0])
        except ValueError:
            raise EdgeListParseError(line_no, f"non-integer node id {parts[0]!r}") from None
        if node in rows:
            raise EdgeListParseError(line_no, f"duplicate node id {node}")
        rows[node] = parts[1]
    if not rows:
        raise EdgeListParseError(0, "no attribute rows found")
    count = n if n is not None else max(rows) + 1
    missing = [v for v in range(count) if v not in rows]
    if missing:
        raise EdgeListParseError(0, f"missing labels for nodes {missing}")
    extra = [v for v in rows if not 0 <= v < count]
    if extra:
        raise EdgeListParseError(0, f"node ids out of range: {sorted(extra)}")
    return NodeAttributes(tuple(rows[v] for v in range(count)))
