"""Metropolis-Hastings network simulation at fixed coefficients.

Two proposal kernels: uniform single-dyad toggles over all simple graphs, and
degree-preserving double edge swaps for simulation constrained to a reference
degree sequence.  A chain owns its state and RNG stream; runs are
deterministic given (model, theta, config) including the seed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError, NotGraphicalError
from .graph import (
    DegreeSequence,
    Graph,
    NodeAttributes,
    havel_hakimi,
    load_graph,
    save_graph,
)
from .terms import ModelSpec, eval_stats_batch, term_arrays


@dataclass(frozen=True)
class SamplerConfig:
    burn_in: int = 50_000
    thin: int = 10_000
    seed: int = 0
    proposal: str = "toggle"  # "toggle" | "degree_swap"
    init: str = "empty"  # "empty" | "observed" | "degree"
    n_samples: int = 5
    debug_checks: bool = False

    def __post_init__(self):
        if self.burn_in < 0:
            raise ConfigurationError("burn_in must be >= 0")
        if self.thin < 1:
            raise ConfigurationError("thin must be >= 1")
        if self.n_samples < 1:
            raise ConfigurationError("n_samples must be >= 1")
        if self.proposal not in ("toggle", "degree_swap"):
            raise ConfigurationError(f"unknown proposal {self.proposal!r}")
        if self.init not in ("empty", "observed", "degree"):
            raise ConfigurationError(f"unknown init {self.init!r}")


class SampleSet:
    """Retained samples of one chain: adjacency stack, aligned statistic
    vectors, and the chain's acceptance rate.  Graph objects are materialized
    lazily (estimation touches only the arrays)."""

    def __init__(self, adjacency, stats, acceptance_rate, model, theta, config):
        self.adjacency = adjacency  # (n_samples, n, n) uint8
        self.stats = stats  # (n_samples, p)
        self.acceptance_rate = acceptance_rate
        self.model = model
        self.theta = theta
        self.config = config
        self._graphs = None

    @property
    def graphs(self) -> list[Graph]:
        if self._graphs is None:
            self._graphs = [
                Graph.from_adjacency(self.adjacency[s])
                for s in range(self.adjacency.shape[0])
            ]
        return self._graphs

    def edge_counts(self) -> np.ndarray:
        return self.adjacency.sum(axis=(1, 2)) // 2


def log_unnormalized_density(
    theta: np.ndarray, g: Graph, model: ModelSpec, attrs: NodeAttributes | None = None
) -> float:
    """theta . g(y); the normalizing constant is deliberately omitted."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (model.p,):
        raise ConfigurationError(
            f"theta has {theta.size} entries, model has {model.p} terms"
        )
    stats = eval_stats_batch(g.adjacency_matrix()[None, :, :], model, attrs)[0]
    return float(theta @ stats)


def _check_theta(theta, model) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (model.p,):
        raise ConfigurationError(
            f"theta has {theta.size} entries, model has {model.p} terms"
        )
    if not np.all(np.isfinite(theta)):
        raise ConfigurationError("theta must be finite")
    return theta


def sample_networks(
    model: ModelSpec,
    theta,
    n: int,
    config: SamplerConfig,
    attrs: NodeAttributes | None = None,
    init_graph: Graph | None = None,
) -> SampleSet:
    """Unconstrained toggle-proposal chain over all simple graphs on n nodes."""
    theta = _check_theta(theta, model)
    if n < 1:
        raise ConfigurationError("node count must be >= 1")
    if config.proposal != "toggle":
        raise ConfigurationError("sample_networks requires the toggle proposal")
    if config.init == "observed":
        if init_graph is None:
            raise ConfigurationError("init='observed' needs init_graph")
        if init_graph.n != n:
            raise ConfigurationError("init_graph node count mismatch")
        start = init_graph
    else:
        start = Graph.empty(n)

    codes, params, wtabs, labels = term_arrays(model, n, attrs)
    adj, deg, nbrs, pos, sp = start.kernel_state()
    cur_stats = eval_stats_batch(adj[None, :, :], model, attrs)[0].copy()
    total = config.burn_in + config.thin * config.n_samples
    rng = np.random.Generator(np.random.PCG64(config.seed))
    iu, ju = np.triu_indices(n, 1)
    picks = rng.integers(0, iu.size, total)
    prop_i = iu[picks].astype(np.int64)
    prop_j = ju[picks].astype(np.int64)
    unif = rng.random(total)
    out_adj = np.zeros((config.n_samples, n, n), dtype=np.uint8)
    out_stats = np.zeros((config.n_samples, model.p), dtype=np.float64)
    accepted = _kernels.toggle_chain(
        adj, deg, nbrs, pos, sp, labels, codes, params, wtabs, theta, cur_stats,
        config.burn_in, config.thin, prop_i, prop_j, unif, out_adj, out_stats,
    )
    return SampleSet(
        adjacency=out_adj,
        stats=out_stats,
        acceptance_rate=accepted / total if total else 0.0,
        model=model,
        theta=theta,
        config=config,
    )


def sample_degree_constrained(
    model: ModelSpec,
    theta,
    ref: DegreeSequence,
    config: SamplerConfig,
    attrs: NodeAttributes | None = None,
) -> SampleSet:
    """Double-edge-swap chain over the realizations of a degree sequence.

    The chain starts from a deterministic realization of ref and every
    retained sample carries exactly that per-node degree sequence.
    """
    theta = _check_theta(theta, model)
    if not ref.is_graphical():
        raise NotGraphicalError(f"degree sequence {ref.degrees} is not graphical")
    if config.proposal != "degree_swap":
        raise ConfigurationError(
            "sample_degree_constrained requires the degree_swap proposal"
        )
    start = havel_hakimi(ref)
    n = start.n
    codes, params, wtabs, labels = term_arrays(model, n, attrs)
    adj, deg, nbrs, pos, sp = start.kernel_state()
    cur_stats = eval_stats_batch(adj[None, :, :], model, attrs)[0].copy()
    edges = sorted(start.edges)
    m = len(edges)
    edge_a = np.array([e[0] for e in edges], dtype=np.int64)
    edge_b = np.array([e[1] for e in edges], dtype=np.int64)
    total = config.burn_in + config.thin * config.n_samples
    out_adj = np.zeros((config.n_samples, n, n), dtype=np.uint8)
    out_stats = np.zeros((config.n_samples, model.p), dtype=np.float64)
    if m < 2:
        # no swap can move the chain: every sample is the unique start state
        out_adj[:] = adj
        out_stats[:] = cur_stats
        accepted = 0
        total = max(total, 1)
    else:
        rng = np.random.Generator(np.random.PCG64(config.seed))
        e1 = rng.integers(0, m, total)
        e2 = rng.integers(0, m - 1, total)
        side = rng.integers(0, 2, total)
        unif = rng.random(total)
        accepted = _kernels.swap_chain(
            adj, deg, nbrs, pos, sp, labels, codes, params, wtabs, theta, cur_stats,
            edge_a, edge_b, config.burn_in, config.thin, e1, e2, side, unif,
            out_adj, out_stats,
        )
    result = SampleSet(
        adjacency=out_adj,
        stats=out_stats,
        acceptance_rate=accepted / total if total else 0.0,
        model=model,
        theta=theta,
        config=config,
    )
    if config.debug_checks:
        want = np.array(ref.degrees, dtype=np.int64)
        degs = out_adj.sum(axis=2)
        bad = np.nonzero((degs != want[None, :]).any(axis=1))[0]
        if bad.size:
            raise AssertionError(f"sample {bad[0]} broke the degree sequence")
    return result


def save_sample_set(samples: SampleSet, outdir) -> None:
    """Persist as numbered edge-list files plus a JSON manifest."""
    os.makedirs(outdir, exist_ok=True)
    names = []
    for k, g in enumerate(samples.graphs):
        name = f"sample_{k:04d}.edges"
        save_graph(g, os.path.join(outdir, name))
        names.append(name)
    manifest = {
        "model": json.loads(samples.model.to_json()),
        "theta": [float(v) for v in samples.theta],
        "config": {
            "burn_in": samples.config.burn_in,
            "thin": samples.config.thin,
            "seed": samples.config.seed,
            "proposal": samples.config.proposal,
            "init": samples.config.init,
            "n_samples": samples.config.n_samples,
        },
        "acceptance_rate": samples.acceptance_rate,
        "samples": names,
        "stats": [[float(v) for v in row] for row in samples.stats],
    }
    with open(os.path.join(outdir, "samples.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_sample_set(outdir) -> SampleSet:
    with open(os.path.join(outdir, "samples.json"), "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    model = ModelSpec.from_json(json.dumps(manifest["model"]))
    cfg = manifest["config"]
    config = SamplerConfig(
        burn_in=cfg["burn_in"],
        thin=cfg["thin"],
        seed=cfg["seed"],
        proposal=cfg["proposal"],
        init=cfg["init"],
        n_samples=cfg["n_samples"],
    )
    graphs = [load_graph(os.path.join(outdir, name)) for name in manifest["samples"]]
    adjacency = np.stack([g.adjacency_matrix() for g in graphs]) if graphs else np.zeros((0, 0, 0), np.uint8)
    return SampleSet(
        adjacency=adjacency,
        stats=np.array(manifest["stats"], dtype=np.float64),
        acceptance_rate=manifest["acceptance_rate"],
        model=model,
        theta=np.array(manifest["theta"], dtype=np.float64),
        config=config,
    )
