import math
import subprocess
import sys
from collections import Counter, defaultdict

import numpy as np
import pytest

from brainrep import _kernels
from brainrep.errors import ConfigurationError, NotGraphicalError
from brainrep.estimator import ExactEnsemble
from brainrep.graph import DegreeSequence, Graph, degree_sequence, toggle_edge
from brainrep.sampler import (
    SamplerConfig,
    load_sample_set,
    log_unnormalized_density,
    sample_degree_constrained,
    sample_networks,
    save_sample_set,
)
from brainrep.terms import ModelSpec, TermSpec, default_group_model, eval_stats
from helpers import random_graph

EDGES_ONLY = ModelSpec((TermSpec("edges"),))


def test_log_unnormalized_density():
    g = random_graph(np.random.default_rng(2), 8, 0.3)
    assert log_unnormalized_density(np.zeros(1), g, EDGES_ONLY) == 0.0
    five = Graph.from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)])
    assert log_unnormalized_density(np.array([-2.0]), five, EDGES_ONLY) == -10.0
    model = default_group_model(0.75)
    theta = np.array([-2.769, 1.014, -0.279])
    got = log_unnormalized_density(theta, five, model)
    assert got == pytest.approx(float(theta @ eval_stats(five, model)))
    with pytest.raises(ConfigurationError):
        log_unnormalized_density(np.zeros(2), five, EDGES_ONLY)


def test_determinism_bit_identical():
    model = default_group_model(0.75)
    theta = np.array([-1.5, 0.5, -0.2])
    cfg = SamplerConfig(burn_in=5000, thin=100, seed=99, n_samples=20)
    a = sample_networks(model, theta, 12, cfg)
    b = sample_networks(model, theta, 12, cfg)
    assert np.array_equal(a.adjacency, b.adjacency)
    assert np.array_equal(a.stats, b.stats)
    assert a.acceptance_rate == b.acceptance_rate
    c = sample_networks(model, theta, 12, SamplerConfig(burn_in=5000, thin=100, seed=100, n_samples=20))
    assert not np.array_equal(a.adjacency, c.adjacency)


def test_uniform_model_mean_edges():
    cfg = SamplerConfig(burn_in=20_000, thin=500, seed=3, n_samples=200)
    ss = sample_networks(EDGES_ONLY, np.zeros(1), 10, cfg)
    mean = ss.stats[:, 0].mean()
    se = ss.stats[:, 0].std(ddof=1) / math.sqrt(len(ss.graphs))
    assert abs(mean - 22.5) < 3 * max(se, 0.3)


def test_dyad_independent_closed_form_n90():
    theta = np.array([-2.2])
    cfg = SamplerConfig(burn_in=100_000, thin=10_000, seed=7, n_samples=100)
    ss = sample_networks(EDGES_ONLY, theta, 90, cfg)
    p = 1.0 / (1.0 + math.exp(2.2))
    want = 4005 * p
    got = ss.stats[:, 0].mean()
    se = ss.stats[:, 0].std(ddof=1) / math.sqrt(100)
    assert abs(got - want) < 4 * se


def test_empirical_distribution_matches_enumeration_small():
    # edges-only on 4 nodes: exact pmf from enumeration over 64 graphs
    theta = np.array([-0.5])
    ens = ExactEnsemble(4, EDGES_ONLY, limit=6)
    probs = ens.probabilities(theta)
    exact = defaultdict(float)
    for mask in range(probs.size):
        exact[ens.stats[mask, 0]] += probs[mask]
    cfg = SamplerConfig(burn_in=2000, thin=15, seed=21, n_samples=20_000)
    ss = sample_networks(EDGES_ONLY, theta, 4, cfg)
    emp = Counter(ss.stats[:, 0].tolist())
    keys = set(exact) | set(emp)
    tv = 0.5 * sum(abs(exact.get(k, 0.0) - emp.get(k, 0) / 20_000) for k in keys)
    assert tv < 0.05


def test_reference_full_evaluation_chain_matches_kernel():
    # shadow chain recomputing full statistics at every proposal must walk
    # the same trajectory as the incremental kernel chain
    model = default_group_model(0.75)
    theta = np.array([-1.0, 0.5, -0.2])
    n = 8
    cfg = SamplerConfig(burn_in=200, thin=10, seed=13, n_samples=30)
    ss = sample_networks(model, theta, n, cfg)

    total = cfg.burn_in + cfg.thin * cfg.n_samples
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    iu, ju = np.triu_indices(n, 1)
    picks = rng.integers(0, iu.size, total)
    unif = rng.random(total)
    g = Graph.empty(n)
    cur = eval_stats(g, model)
    kept = []
    for step in range(total):
        i, j = int(iu[picks[step]]), int(ju[picks[step]])
        flipped = toggle_edge(g, i, j)
        delta = eval_stats(flipped, model) - cur
        logr = float(theta @ delta)
        if logr >= 0.0 or unif[step] < math.exp(logr):
            g = flipped
            cur = cur + delta
        k = step - cfg.burn_in + 1
        if k > 0 and k % cfg.thin == 0 and len(kept) < cfg.n_samples:
            kept.append(g)
    assert [s.edges for s in ss.graphs] == [s.edges for s in kept]


def test_swap_chain_preserves_degree_sequence():
    model = default_group_model(0.75)
    theta = np.array([-1.0, 0.5, -0.2])
    rng = np.random.default_rng(31)
    base = random_graph(rng, 15, 0.3)
    ref = degree_sequence(base)
    cfg = SamplerConfig(burn_in=3000, thin=200, seed=5, n_samples=50,
                        proposal="degree_swap", init="degree", debug_checks=True)
    ss = sample_degree_constrained(model, theta, ref, cfg)
    for g in ss.graphs:
        assert degree_sequence(g).degrees == ref.degrees


def test_swap_chain_uniform_over_realizations():
    # theta = 0 must be uniform over the three labeled 2-regular graphs on 4 nodes
    ref = DegreeSequence((2, 2, 2, 2))
    cfg = SamplerConfig(burn_in=500, thin=10, seed=1, n_samples=30_000,
                        proposal="degree_swap", init="degree")
    ss = sample_degree_constrained(EDGES_ONLY, np.zeros(1), ref, cfg)
    seen = Counter(g.edges for g in ss.graphs)
    assert len(seen) == 3
    tv = 0.5 * sum(abs(c / 30_000 - 1 / 3) for c in seen.values())
    assert tv < 0.05


def test_swap_requires_graphical_sequence():
    with pytest.raises(NotGraphicalError):
        sample_degree_constrained(
            EDGES_ONLY, np.zeros(1), DegreeSequence((3, 1, 1, 0)),
            SamplerConfig(proposal="degree_swap", init="degree"),
        )


def test_proposal_config_validation():
    with pytest.raises(ConfigurationError):
        sample_networks(EDGES_ONLY, np.zeros(1), 5,
                        SamplerConfig(proposal="degree_swap", init="degree"))
    with pytest.raises(ConfigurationError):
        SamplerConfig(thin=0)
    with pytest.raises(ConfigurationError):
        SamplerConfig(burn_in=-1)


def test_sample_set_round_trip(tmp_path):
    model = default_group_model(0.75)
    theta = np.array([-1.0, 0.4, -0.1])
    cfg = SamplerConfig(burn_in=2000, thin=100, seed=11, n_samples=8)
    ss = sample_networks(model, theta, 10, cfg)
    save_sample_set(ss, tmp_path / "run")
    back = load_sample_set(tmp_path / "run")
    assert [g.edges for g in back.graphs] == [g.edges for g in ss.graphs]
    assert np.allclose(back.stats, ss.stats)
    assert back.acceptance_rate == ss.acceptance_rate
    assert back.model == model


@pytest.mark.skipif(not _kernels.NUMBA_ENABLED, reason="numba disabled")
def test_pure_python_path_matches_compiled():
    # the interpreted kernel body must walk the same trajectory bit for bit
    model = default_group_model(0.75)
    theta = np.array([-1.0, 0.5, -0.2])
    n = 10
    cfg = SamplerConfig(burn_in=500, thin=20, seed=17, n_samples=10)
    compiled = sample_networks(model, theta, n, cfg)

    from brainrep.terms import eval_stats_batch, term_arrays

    codes, params, wtabs, labels = term_arrays(model, n)
    start = Graph.empty(n)
    adj, deg, nbrs, pos, sp = start.kernel_state()
    cur = eval_stats_batch(adj[None], model)[0].copy()
    total = cfg.burn_in + cfg.thin * cfg.n_samples
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    iu, ju = np.triu_indices(n, 1)
    picks = rng.integers(0, iu.size, total)
    prop_i = iu[picks].astype(np.int64)
    prop_j = ju[picks].astype(np.int64)
    unif = rng.random(total)
    out_adj = np.zeros((cfg.n_samples, n, n), dtype=np.uint8)
    out_stats = np.zeros((cfg.n_samples, model.p))
    accepted = _kernels.toggle_chain.py_func(
        adj, deg, nbrs, pos, sp, labels, codes, params, wtabs,
        np.asarray(theta, dtype=np.float64), cur,
        cfg.burn_in, cfg.thin, prop_i, prop_j, unif, out_adj, out_stats,
    )
    assert np.array_equal(out_adj, compiled.adjacency)
    assert np.array_equal(out_stats, compiled.stats)
    assert accepted / total == compiled.acceptance_rate


def test_env_flag_subprocess_parity():
    # full pure-python import path (BRAINREP_NUMBA=0) must reproduce samples
    script = (
        "import numpy as np\n"
        "from brainrep.sampler import SamplerConfig, sample_networks\n"
        "from brainrep.terms import default_group_model\n"
        "model = default_group_model(0.75)\n"
        "cfg = SamplerConfig(burn_in=500, thin=20, seed=17, n_samples=5)\n"
        "ss = sample_networks(model, np.array([-1.0, 0.5, -0.2]), 10, cfg)\n"
        "print(sorted(map(sorted, (g.edges for g in ss.graphs))))\n"
    )
    outs = []
    for flag in ("1", "0"):
        res = subprocess.run(
            [sys.executable, "-c", script],
            capture_output=True, text=True, check=True,
            env={"BRAINREP_NUMBA": flag, "PATH": "/usr/bin:/bin:/usr/local/bin"},
        )
        outs.append(res.stdout)
    assert outs[0] == outs[1]
