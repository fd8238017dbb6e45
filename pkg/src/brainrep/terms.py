"""ERGM sufficient statistics and their single-dyad change statistics.

Supported terms: edge count, two-path count, degree-k node count, and the
geometrically weighted degree / edgewise / non-edgewise / dyadwise
shared-partner statistics (curved family with fixed decay), plus a
categorical nodematch count.  The geometrically weighted statistics use the
canonical parametrization

    gw(tau) = e^tau * sum_{i>=1} [1 - (1 - e^-tau)^i] * count_i

so a count with more partners (or higher degree) contributes with
geometrically diminishing extra weight.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import (
    TERM_EDGES,
    TERM_GWD,
    TERM_GWDSP,
    TERM_GWESP,
    TERM_GWNSP,
    TERM_KDEGREE,
    TERM_NODEMATCH,
    TERM_TWOPATH,
)
from .errors import ConfigurationError, InvalidDyadError
from .graph import Graph, NodeAttributes

TAU_DEFAULT = 0.75

_KINDS = {
    "edges": TERM_EDGES,
    "two_path": TERM_TWOPATH,
    "k_degree": TERM_KDEGREE,
    "gwd": TERM_GWD,
    "gwesp": TERM_GWESP,
    "gwnsp": TERM_GWNSP,
    "gwdsp": TERM_GWDSP,
    "nodematch": TERM_NODEMATCH,
}
_GW_KINDS = ("gwd", "gwesp", "gwnsp", "gwdsp")

# canonical ordering used for tie-breaks in model selection
KIND_ORDER = ("edges", "two_path", "gwesp", "gwdsp", "gwnsp", "gwd", "k_degree", "nodematch")


@dataclass(frozen=True)
class TermSpec:
    kind: str
    tau: float | None = None
    k: int | None = None
    attribute: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unknown term kind {self.kind!r}")
        if self.kind in _GW_KINDS:
            if self.tau is None or self.tau <= 0:
                raise ConfigurationError(f"{self.kind} needs decay tau > 0")
        elif self.tau is not None:
            raise ConfigurationError(f"{self.kind} takes no tau")
        if self.kind == "k_degree":
            if self.k is None or self.k < 0:
                raise ConfigurationError("k_degree needs k >= 0")
        elif self.k is not None:
            raise ConfigurationError(f"{self.kind} takes no k")
        if self.kind == "nodematch":
            if not self.attribute:
                raise ConfigurationError("nodematch needs an attribute name")
        elif self.attribute is not None:
            raise ConfigurationError(f"{self.kind} takes no attribute")

    @property
    def label(self) -> str:
        if self.kind in _GW_KINDS:
            return f"{self.kind}({self.tau:g})"
        if self.kind == "k_degree":
            return f"k_degree({self.k})"
        if self.kind == "nodematch":
            return f"nodematch({self.attribute})"
        return self.kind


@dataclass(frozen=True)
class ModelSpec:
    terms: tuple[TermSpec, ...]

    def __post_init__(self):
        if not self.terms:
            raise ConfigurationError("model needs at least one term")
        if len(set(self.terms)) != len(self.terms):
            raise ConfigurationError("duplicate term in model")

    @property
    def p(self) -> int:
        return len(self.terms)

    @property
    def needs_attributes(self) -> bool:
        return any(t.kind == "nodematch" for t in self.terms)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.label for t in self.terms)

    def to_json(self) -> str:
        rows = []
        for t in self.terms:
            row = {"kind": t.kind}
            if t.tau is not None:
                row["tau"] = t.tau
            if t.k is not None:
                row["k"] = t.k
            if t.attribute is not None:
                row["attribute"] = t.attribute
            rows.append(row)
        return json.dumps({"terms": rows}, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        doc = json.loads(text)
        terms = tuple(
            TermSpec(
                kind=row["kind"],
                tau=row.get("tau"),
                k=row.get("k"),
                attribute=row.get("attribute"),
            )
            for row in doc["terms"]
        )
        return cls(terms)


def default_group_model(tau: float = TAU_DEFAULT) -> ModelSpec:
    """Edge count + GWESP + GWNSP, the three-term group model."""
    return ModelSpec(
        (
            TermSpec("edges"),
            TermSpec("gwesp", tau=tau),
            TermSpec("gwnsp", tau=tau),
        )
    )


def geometric_weights(tau: float, size: int) -> np.ndarray:
    """w[d] = e^tau * (1 - (1 - e^-tau)^d) for d = 0..size-1."""
    d = np.arange(size, dtype=np.float64)
    return np.exp(tau) * (1.0 - (1.0 - np.exp(-tau)) ** d)


def term_arrays(model: ModelSpec, n: int, attrs: NodeAttributes | None = None):
    """Kernel encoding: (codes, params, wtabs, labels) for an n-node graph."""
    if model.needs_attributes:
        if attrs is None:
            raise ConfigurationError("model contains nodematch but no attributes given")
        if attrs.n != n:
            raise ConfigurationError(f"attributes cover {attrs.n} nodes, graph has {n}")
        labels = attrs.codes()
    else:
        labels = np.zeros(n, dtype=np.int64)
    p = model.p
    codes = np.empty(p, dtype=np.int64)
    params = np.zeros(p, dtype=np.float64)
    wtabs = np.zeros((p, n + 1), dtype=np.float64)
    for t, term in enumerate(model.terms):
        codes[t] = _KINDS[term.kind]
        if term.kind == "k_degree":
            params[t] = term.k
        elif term.kind in _GW_KINDS:
            params[t] = term.tau
            wtabs[t] = geometric_weights(term.tau, n + 1)
    return codes, params, wtabs, labels


def eval_stats(
    g: Graph, model: ModelSpec, attrs: NodeAttributes | None = None
) -> np.ndarray:
    """Statistic vector g(y), ordered as the model's terms."""
    a = g.adjacency_matrix().astype(np.int64)
    return eval_stats_batch(a[None, :, :], model, attrs)[0]


def eval_stats_batch(
    adjs: np.ndarray, model: ModelSpec, attrs: NodeAttributes | None = None
) -> np.ndarray:
    """Statistic vectors for a (batch, n, n) stack of adjacency matrices."""
    n = adjs.shape[1]
    if model.needs_attributes:
        if attrs is None:
            raise ConfigurationError("model contains nodematch but no attributes given")
        if attrs.n != n:
            raise ConfigurationError(f"attributes cover {attrs.n} nodes, graph has {n}")
        labels = attrs.codes()
    else:
        labels = None
    a = adjs.astype(np.float64)  # float matmul hits BLAS; counts stay exact
    batch = a.shape[0]
    deg = a.sum(axis=2).astype(np.int64)
    sp = np.rint(np.matmul(a, a)).astype(np.int64)
    iu, ju = np.triu_indices(n, 1)
    spu = sp[:, iu, ju]
    on_edge = adjs[:, iu, ju] == 1
    out = np.empty((batch, model.p), dtype=np.float64)
    for t, term in enumerate(model.terms):
        if term.kind == "edges":
            out[:, t] = on_edge.sum(axis=1)
        elif term.kind == "two_path":
            out[:, t] = (deg * (deg - 1) // 2).sum(axis=1)
        elif term.kind == "k_degree":
            out[:, t] = (deg == term.k).sum(axis=1)
        elif term.kind == "gwd":
            w = geometric_weights(term.tau, n + 1)
            out[:, t] = w[deg].sum(axis=1)
        elif term.kind == "gwesp":
            w = geometric_weights(term.tau, n + 1)
            out[:, t] = np.where(on_edge, w[spu], 0.0).sum(axis=1)
        elif term.kind == "gwnsp":
            w = geometric_weights(term.tau, n + 1)
            out[:, t] = np.where(on_edge, 0.0, w[spu]).sum(axis=1)
        elif term.kind == "gwdsp":
            w = geometric_weights(term.tau, n + 1)
            out[:, t] = w[spu].sum(axis=1)
        else:  # nodematch
            match = (labels[iu] == labels[ju]) & on_edge
            out[:, t] = match.sum(axis=1)
    return out


def change_stats(
    g: Graph,
    model: ModelSpec,
    dyad: tuple[int, int],
    attrs: NodeAttributes | None = None,
) -> np.ndarray:
    """g(y with dyad present) - g(y with dyad absent), regardless of state."""
    i, j = dyad
    if i == j:
        raise InvalidDyadError(f"self-loop at node {i}")
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise InvalidDyadError(f"dyad ({i}, {j}) outside [0, {g.n})")
    codes, params, wtabs, labels = term_arrays(model, g.n, attrs)
    adj, deg, nbrs, pos, sp = g.kernel_state()
    delta = np.empty(model.p, dtype=np.float64)
    _kernels.dyad_delta(adj, deg, nbrs, sp, labels, codes, params, wtabs, i, j, delta)
    if g.has_edge(i, j):
        delta = -delta
    return delta


def change_stats_all_dyads(
    g: Graph, model: ModelSpec, attrs: NodeAttributes | None = None
) -> np.ndarray:
    """Change statistics for every dyad i < j (triu order); rows are dyads."""
    codes, params, wtabs, labels = term_arrays(model, g.n, attrs)
    adj, deg, nbrs, pos, sp = g.kernel_state()
    n_dyads = g.n * (g.n - 1) // 2
    out = np.empty((n_dyads, model.p), dtype=np.float64)
    _kernels.all_change_stats(adj, deg, nbrs, sp, labels, codes, params, wtabs, out)
    return out
