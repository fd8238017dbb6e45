import numpy as np
import pytest

from brainrep.errors import (
    AssessmentError,
    ConfigurationError,
    PipelineError,
)
from brainrep.estimator import EstimatorConfig, FitResult
from brainrep.graph import DegreeSequence, Graph, degree_sequence
from brainrep.pipeline import (
    Candidate,
    PipelineConfig,
    Subject,
    SubjectSet,
    assess_candidates,
    assess_profile_rows,
    euclidean_distance,
    generate_candidates,
    group_correlation_network,
    group_theta,
    pick_reference_subject,
    run_pipeline,
    theta_table_csv,
    threshold_at_value,
    threshold_to_density,
)
from brainrep.sampler import SamplerConfig, sample_networks
from brainrep.terms import default_group_model
from reference_values import (
    CANDIDATE_ROWS,
    GROUP_MEAN_PROFILE,
    GROUP_MEDIAN_PROFILE,
    SUBJECT_THETAS,
    THETA_MEAN,
    THETA_MEDIAN,
)

MODEL = default_group_model(0.75)


def symmetric(rng, n):
    m = rng.normal(0, 1, (n, n))
    m = (m + m.T) / 2
    np.fill_diagonal(m, 1.0)
    return np.clip(m, -1, 1)


def test_threshold_keeps_exact_count_at_reference_scale():
    rng = np.random.default_rng(3)
    corr = symmetric(rng, 90)
    g = threshold_to_density(corr, 2.8)
    assert g.number_of_edges == 225
    assert degree_sequence(g).mean_degree == pytest.approx(5.0)


def test_threshold_picks_largest_entries():
    n = 6
    corr = np.full((n, n), 0.1)
    strong = [(0, 1), (2, 3), (4, 5), (0, 2)]
    for i, j in strong:
        corr[i, j] = corr[j, i] = 0.9
    np.fill_diagonal(corr, 1.0)
    # target degree 6^(1/2.8) = 1.897 -> ceil(6*1.897/2) = 6 edges; the four
    # strong dyads must all survive
    g = threshold_to_density(corr, 2.8)
    assert set(strong) <= set(g.edges)


def test_threshold_tie_break_is_deterministic():
    n = 5
    corr = np.full((n, n), 0.5)
    np.fill_diagonal(corr, 1.0)
    g = threshold_to_density(corr, 2.8)
    # K = 5^(1/2.8) = 1.777 -> ceil(4.44) = 5 edges, taken in (i, j) order
    assert g.number_of_edges == 5
    assert sorted(g.edges) == [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)]
    assert threshold_to_density(corr, 2.8).edges == g.edges


def test_threshold_validation():
    rng = np.random.default_rng(4)
    bad = rng.normal(0, 1, (6, 6))
    with pytest.raises(ConfigurationError):
        threshold_to_density(bad, 2.8)
    with pytest.raises(ConfigurationError):
        threshold_to_density(symmetric(rng, 6), 0.9)


def test_threshold_at_value():
    n = 4
    corr = np.full((n, n), 0.2)
    corr[0, 1] = corr[1, 0] = 0.8
    np.fill_diagonal(corr, 1.0)
    g = threshold_at_value(corr, 0.5)
    assert g.edges == frozenset({(0, 1)})


def test_group_network_identical_matrices_match_single_subject():
    rng = np.random.default_rng(7)
    corr = symmetric(rng, 20)
    subjects = SubjectSet([Subject(f"s{k}", matrix=corr.copy()) for k in range(3)])
    for mode in ("mean", "median"):
        g = group_correlation_network(subjects, mode, 2.8)
        assert g.edges == threshold_to_density(corr, 2.8).edges


def test_group_network_outlier_shifts_mean_not_median():
    rng = np.random.default_rng(11)
    base = symmetric(rng, 12)
    base_net = threshold_to_density(base, 2.8)
    # one subject drives the first dyad *below* the cut up to a full-strength
    # correlation; the mean crosses the threshold, the median must not move
    ranked = sorted(
        ((i, j) for i in range(12) for j in range(i + 1, 12)),
        key=lambda d: -base[d],
    )
    bumped = next(d for d in ranked if d not in base_net.edges)
    outlier = base.copy()
    outlier[bumped[0], bumped[1]] = outlier[bumped[1], bumped[0]] = 1.0
    subjects = SubjectSet(
        [Subject("a", matrix=base.copy()), Subject("b", matrix=base.copy()),
         Subject("c", matrix=outlier)]
    )
    mean_net = group_correlation_network(subjects, "mean", 2.8)
    median_net = group_correlation_network(subjects, "median", 2.8)
    assert bumped in mean_net.edges
    assert median_net.edges == base_net.edges
    assert bumped not in median_net.edges


def test_group_theta_reproduces_reference_summaries():
    thetas = [np.array(v) for v in SUBJECT_THETAS.values()]
    mean = group_theta(thetas, "mean")
    median = group_theta(thetas, "median")
    assert np.allclose(mean, THETA_MEAN, atol=1e-3)
    assert np.allclose(median, THETA_MEDIAN, atol=1e-3)
    single = group_theta([thetas[0]], "mean")
    assert np.allclose(single, thetas[0])


def test_group_theta_rejects_mixed_models():
    f1 = FitResult(np.zeros(1), np.zeros(1), True, "mple",
                   default_group_model(0.75))
    from brainrep.terms import ModelSpec, TermSpec
    other = ModelSpec((TermSpec("edges"),))
    f2 = FitResult(np.zeros(1), np.zeros(1), True, "mple", other)
    with pytest.raises(ConfigurationError):
        group_theta([f1, f2], "mean")
    with pytest.raises(ConfigurationError):
        group_theta([np.zeros(2), np.zeros(3)], "median")


def graph_with_degrees(seed, n, p):
    return sample_networks(
        default_group_model(0.75), np.array([-2.0, 0.5, -0.25]), n,
        SamplerConfig(burn_in=60_000, thin=1, seed=seed, n_samples=1),
    ).graphs[0]


def test_pick_reference_identical_subjects_tie_break():
    g = graph_with_degrees(1, 15, 0.3)
    subjects = SubjectSet([Subject(f"s{k}", graph=g) for k in range(4)])
    winner, ranking = pick_reference_subject(subjects)
    assert winner == "s0"
    assert [r[0] for r in ranking] == ["s0", "s1", "s2", "s3"]
    assert all(r[1] == 0.0 for r in ranking)


def test_pick_reference_prefers_central_degree_distribution():
    # two extreme degree profiles and one in the middle: the middle wins
    star = Graph.from_edges(6, [(0, k) for k in range(1, 6)])
    cycle = Graph.from_edges(6, [(k, (k + 1) % 6) for k in range(6)])
    middle = Graph.from_edges(6, [(0, 1), (0, 2), (0, 3), (1, 2), (4, 5)])
    subjects = SubjectSet(
        [Subject("ext1", graph=star), Subject("mid", graph=middle),
         Subject("ext2", graph=cycle)]
    )
    winner, _ = pick_reference_subject(subjects)
    assert winner == "mid"
    with pytest.raises(ConfigurationError):
        pick_reference_subject(SubjectSet([Subject("only", graph=star)]))


def test_generate_candidates_counts_and_provenance():
    theta = np.array([-1.8, 0.4, -0.2])
    ref = degree_sequence(graph_with_degrees(5, 14, 0.3))
    cands = generate_candidates(
        MODEL, theta, theta * 1.01, n=14, m=5, constraint=ref,
        burn_in=5_000, thin=100, master_seed=40,
    )
    assert len(cands) == 20
    assert [c.seed for c in cands] == list(range(40, 60))
    assert [c.source for c in cands] == ["mean"] * 5 + ["median"] * 5 + ["mean"] * 5 + ["median"] * 5
    assert [c.constrained for c in cands] == [False] * 10 + [True] * 10
    for c in cands:
        assert c.graph is not None
        if c.constrained:
            assert degree_sequence(c.graph).degrees == ref.degrees
    unconstrained_only = generate_candidates(
        MODEL, theta, theta, n=14, m=2, constraint=None,
        burn_in=1_000, thin=50, master_seed=0,
    )
    assert len(unconstrained_only) == 4


def test_generate_candidates_records_failures(monkeypatch):
    import brainrep.pipeline as pl

    real = pl.sample_networks
    calls = {"k": 0}

    def flaky(*args, **kwargs):
        calls["k"] += 1
        if calls["k"] == 2:
            raise ConfigurationError("synthetic failure")
        return real(*args, **kwargs)

    monkeypatch.setattr(pl, "sample_networks", flaky)
    theta = np.array([-1.5, 0.3, -0.2])
    cands = generate_candidates(MODEL, theta, theta, n=10, m=2,
                                burn_in=500, thin=50, master_seed=9)
    assert len(cands) == 4
    assert cands[1].graph is None
    assert "synthetic failure" in cands[1].error
    assert all(c.graph is not None for k, c in enumerate(cands) if k != 1)


def test_euclidean_distance_properties():
    rng = np.random.default_rng(13)
    for _ in range(50):
        a = rng.normal(0, 5, 7)
        b = rng.normal(0, 5, 7)
        with_k = euclidean_distance(a, b, include_k=True)
        without_k = euclidean_distance(a, b, include_k=False)
        assert without_k <= with_k + 1e-12
    assert euclidean_distance(a, a) == 0.0


def test_assess_profile_rows_reproduce_published_distances():
    rows = [(name, family, constrained, np.array(vec))
            for name, family, constrained, vec, _, _ in CANDIDATE_ROWS]
    got = assess_profile_rows(rows, np.array(GROUP_MEAN_PROFILE),
                              np.array(GROUP_MEDIAN_PROFILE))
    for row, (_, _, _, _, d_with, d_without) in zip(got, CANDIDATE_ROWS):
        assert row.distance_with_k == pytest.approx(d_with, abs=0.02)
        assert row.distance_without_k == pytest.approx(d_without, abs=0.02)


def test_assess_candidates_small_networks():
    graphs = [graph_with_degrees(s, 16, 0.3) for s in (21, 22, 23)]
    subjects = SubjectSet(
        [Subject(f"s{k}", graph=g) for k, g in enumerate(graphs)]
    )
    cands = generate_candidates(
        MODEL, np.array([-1.8, 0.4, -0.2]), np.array([-1.8, 0.4, -0.2]),
        n=16, m=2, burn_in=20_000, thin=100, master_seed=3,
    )
    table = assess_candidates(cands, subjects)
    cand_rows = [r for r in table.rows if r.kind == "candidate"]
    assert len(cand_rows) == 4
    for row in cand_rows:
        assert row.distance_without_k <= row.distance_with_k + 1e-12
    best = min(cand_rows, key=lambda r: r.distance_with_k)
    assert table.best_overall == best.candidate_index
    csv = table.to_csv()
    assert csv.splitlines()[0].startswith("name,kind,family,constrained,N_c")


def test_assess_rejects_undefined_assortativity():
    cycle = Graph.from_edges(6, [(k, (k + 1) % 6) for k in range(6)])  # regular
    path = Graph.from_edges(6, [(k, k + 1) for k in range(5)])
    subjects = SubjectSet([Subject("a", graph=path), Subject("b", graph=path)])
    cands = [Candidate(0, "mean", False, 0, cycle)]
    with pytest.raises(AssessmentError) as exc:
        assess_candidates(cands, subjects)
    assert "unconstrained_mean_0" in str(exc.value)


def make_group(seed, n=20, count=4):
    rng = np.random.default_rng(seed)
    shared = rng.normal(0, 1, (n, n))
    shared = (shared + shared.T) / 2
    subjects = []
    for s in range(count):
        g = sample_networks(
            MODEL, np.array([-1.9, 0.5, -0.3]), n,
            SamplerConfig(burn_in=100_000, thin=1, seed=seed * 100 + s, n_samples=1),
        ).graphs[0]
        noise = rng.normal(0, 1, (n, n))
        noise = (noise + noise.T) / 2
        m = np.tanh(1.2 * g.adjacency_matrix() + 0.3 * shared + 0.3 * noise)
        np.fill_diagonal(m, 1.0)
        subjects.append(Subject(f"s{s:02d}", matrix=m))
    return SubjectSet(subjects)


PIPE_CFG = PipelineConfig(
    model=MODEL, m=2, seed=5,
    estimator=EstimatorConfig(sample_size=256, refine_size=1536, max_iterations=10,
                              refine_rounds=4, t_ratio_threshold=0.3, seed=0),
    candidate_burn_in=20_000, candidate_thin=2_000, gof_nsim=5,
)


def test_run_pipeline_end_to_end():
    subjects = make_group(61)
    result = run_pipeline(subjects, PIPE_CFG)
    assert result.model == MODEL
    assert len(result.fits) == 4
    assert all(f.converged for f in result.fits)
    assert result.theta_mean.shape == (3,)
    assert len(result.candidates) == 8  # 2m unconstrained + 2m constrained
    assert result.representative is not None
    assert result.representative_index == result.table.best_overall
    ref_seq = degree_sequence(
        next(s.graph for s in subjects if s.id == result.reference_subject)
    )
    for cand in result.candidates:
        if cand.constrained:
            assert degree_sequence(cand.graph).degrees == ref_seq.degrees
    assert set(result.gof_reports) == {s.id for s in subjects}
    assert set(result.edge_based) == {"mean", "median"}
    csv = theta_table_csv([s.id for s in subjects], result.fits,
                          result.theta_mean, result.theta_median)
    assert csv.count("\n") == 1 + 4 + 2


def test_run_pipeline_is_deterministic():
    a = run_pipeline(make_group(67), PIPE_CFG)
    b = run_pipeline(make_group(67), PIPE_CFG)
    assert np.array_equal(a.theta_mean, b.theta_mean)
    assert a.table.to_csv() == b.table.to_csv()
    assert [c.graph.edges for c in a.candidates] == [c.graph.edges for c in b.candidates]


def test_run_pipeline_stage_errors_are_labeled():
    rng = np.random.default_rng(71)
    bad = rng.normal(0, 1, (8, 8))  # asymmetric
    subjects = SubjectSet([Subject("a", matrix=bad), Subject("b", matrix=symmetric(rng, 8))])
    with pytest.raises(PipelineError) as exc:
        run_pipeline(subjects, PIPE_CFG)
    assert exc.value.stage == "threshold"
