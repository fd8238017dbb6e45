"""Group pipeline: threshold subject matrices, fit the group model per
subject, summarize coefficients, simulate candidate representative networks,
and select the candidate whose metric profile sits closest to the group's.

Thresholding keeps the strongest correlations until the target density
implied by the size/degree relation S = log(n)/log(K) is reached, i.e. a
target mean degree of K = n^(1/s).  Candidate networks simulated from the
group-mean coefficients are scored against the group-mean metric profile,
median-derived candidates against the group-median profile; the Euclidean
distance runs over the raw seven-metric vector, and is also reported with
mean degree left out.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    AssessmentError,
    BrainrepError,
    ConfigurationError,
    DegenerateGraphError,
    PipelineError,
)
from .estimator import EstimatorConfig, FitResult, _seed_for, mcmc_mle
from .gof import (
    GofConfig,
    GofReport,
    SelectionConfig,
    derive_group_model,
    gof_report,
    select_model,
)
from .graph import DegreeSequence, Graph, NodeAttributes, degree_sequence
from .metrics import MetricProfile, PROFILE_COLUMNS, metric_profile
from .sampler import SamplerConfig, sample_degree_constrained, sample_networks
from .terms import ModelSpec, default_group_model


@dataclass
class Subject:
    id: str
    matrix: np.ndarray | None = None
    graph: Graph | None = None


class SubjectSet:
    """Ordered subjects sharing one node count and labeling."""

    def __init__(self, subjects: list[Subject]):
        if not subjects:
            raise ConfigurationError("empty subject set")
        sizes = set()
        for s in subjects:
            if s.matrix is not None:
                sizes.add(s.matrix.shape[0])
            if s.graph is not None:
                sizes.add(s.graph.n)
            if s.matrix is None and s.graph is None:
                raise ConfigurationError(f"subject {s.id} has neither matrix nor graph")
        if len(sizes) != 1:
            raise ConfigurationError(f"subjects disagree on node count: {sorted(sizes)}")
        self.subjects = list(subjects)
        self.n = sizes.pop()

    def __len__(self):
        return len(self.subjects)

    def __iter__(self):
        return iter(self.subjects)

    def ids(self) -> list[str]:
        return [s.id for s in self.subjects]

    def matrices(self) -> list[np.ndarray]:
        if any(s.matrix is None for s in self.subjects):
            raise ConfigurationError("not all subjects carry a correlation matrix")
        return [s.matrix for s in self.subjects]

    def graphs(self) -> list[Graph]:
        if any(s.graph is None for s in self.subjects):
            raise ConfigurationError("not all subjects carry a thresholded graph")
        return [s.graph for s in self.subjects]


def load_correlation_matrix(source) -> np.ndarray:
    """Read an n x n comma-separated matrix; validates symmetry and range."""
    mat = np.loadtxt(source, delimiter=",", dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ConfigurationError(f"correlation matrix must be square, got {mat.shape}")
    if not np.allclose(mat, mat.T, atol=1e-9):
        raise ConfigurationError("correlation matrix is not symmetric")
    if np.abs(mat).max() > 1.0 + 1e-9:
        raise ConfigurationError("correlation entries must lie in [-1, 1]")
    mat = np.clip((mat + mat.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(mat, 1.0)
    return mat


def threshold_to_density(corr: np.ndarray, s: float = 2.8) -> Graph:
    """Keep the largest off-diagonal entries until mean degree n^(1/s).

    Ties straddling the cutoff resolve by (value desc, i asc, j asc), so the
    edge count is exact and deterministic.
    """
    corr = np.asarray(corr, dtype=np.float64)
    n = corr.shape[0]
    if corr.ndim != 2 or corr.shape[1] != n:
        raise ConfigurationError(f"matrix must be square, got {corr.shape}")
    if n < 2:
        raise ConfigurationError("need at least two nodes to threshold")
    if s <= 1:
        raise ConfigurationError("density exponent must exceed 1")
    if not np.allclose(corr, corr.T, atol=1e-9):
        raise ConfigurationError("matrix is not symmetric")
    target_degree = n ** (1.0 / s)
    n_edges = min(math.ceil(n * target_degree / 2.0), n * (n - 1) // 2)
    if n_edges == 0:
        raise ConfigurationError("thresholding would keep zero edges")
    iu, ju = np.triu_indices(n, 1)
    vals = corr[iu, ju]
    order = np.lexsort((ju, iu, -vals))
    keep = order[:n_edges]
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def threshold_at_value(corr: np.ndarray, cutoff: float) -> Graph:
    """Keep every off-diagonal entry strictly above a fixed correlation."""
    corr = np.asarray(corr, dtype=np.float64)
    n = corr.shape[0]
    if not np.allclose(corr, corr.T, atol=1e-9):
        raise ConfigurationError("matrix is not symmetric")
    iu, ju = np.triu_indices(n, 1)
    keep = corr[iu, ju] > cutoff
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def group_correlation_network(
    subjects: SubjectSet,
    mode: str,
    s: float = 2.8,
    threshold_mode: str = "density",
    threshold_value: float = 0.0,
) -> Graph:
    """Element-wise mean/median of the subject matrices, then threshold."""
    if mode not in ("mean", "median"):
        raise ConfigurationError(f"mode must be mean or median, got {mode!r}")
    if len(subjects) < 2:
        raise ConfigurationError("group network needs at least two subjects")
    stack = np.stack(subjects.matrices())
    combined = stack.mean(axis=0) if mode == "mean" else np.median(stack, axis=0)
    if threshold_mode == "density":
        return threshold_to_density(combined, s)
    if threshold_mode == "value":
        return threshold_at_value(combined, threshold_value)
    raise ConfigurationError(f"unknown threshold mode {threshold_mode!r}")


def group_theta(fits, mode: str) -> np.ndarray:
    """Element-wise mean/median of coefficient vectors across subjects.

    Vectors must come from one identical model; coefficient summaries across
    differing term sets are meaningless and rejected.
    """
    if mode not in ("mean", "median"):
        raise ConfigurationError(f"mode must be mean or median, got {mode!r}")
    if not fits:
        raise ConfigurationError("no coefficient vectors given")
    thetas = []
    models = set()
    for f in fits:
        if isinstance(f, FitResult):
            models.add(f.model)
            thetas.append(np.asarray(f.theta, dtype=np.float64))
        else:
            thetas.append(np.asarray(f, dtype=np.float64))
    if len(models) > 1:
        raise ConfigurationError("coefficient vectors come from different models")
    lengths = {t.shape for t in thetas}
    if len(lengths) != 1:
        raise ConfigurationError(f"coefficient vectors differ in length: {lengths}")
    stack = np.stack(thetas)
    return stack.mean(axis=0) if mode == "mean" else np.median(stack, axis=0)


def _degree_cdf(g: Graph) -> np.ndarray:
    deg = g.adjacency_matrix().sum(axis=1)
    counts = np.bincount(deg, minlength=g.n)
    return np.cumsum(counts) / g.n


def pick_reference_subject(subjects: SubjectSet) -> tuple[str, list[tuple[str, float]]]:
    """Subject whose degree distribution is closest to everyone else's.

    Minimizes the summed Kolmogorov-Smirnov distance between degree CDFs;
    ties break by subject order.  Returns (winner id, full ranking).
    """
    if len(subjects) < 2:
        raise ConfigurationError("need at least two subjects to pick a reference")
    graphs = subjects.graphs()
    cdfs = [_degree_cdf(g) for g in graphs]
    scores = []
    for a in range(len(cdfs)):
        total = 0.0
        for b in range(len(cdfs)):
            if a != b:
                total += float(np.max(np.abs(cdfs[a] - cdfs[b])))
        scores.append(total)
    order = sorted(range(len(scores)), key=lambda k: (scores[k], k))
    ranking = [(subjects.subjects[k].id, scores[k]) for k in order]
    return ranking[0][0], ranking


@dataclass
class Candidate:
    index: int
    source: str  # "mean" | "median"
    constrained: bool
    seed: int
    graph: Graph | None
    error: str | None = None


def generate_candidates(
    model: ModelSpec,
    theta_mean: np.ndarray,
    theta_median: np.ndarray,
    n: int,
    m: int = 5,
    constraint: DegreeSequence | None = None,
    burn_in: int = 50_000,
    thin: int = 10_000,
    master_seed: int = 0,
    attrs: NodeAttributes | None = None,
) -> list[Candidate]:
    """Simulate 2m unconstrained candidates (m per coefficient summary) and,
    when a reference degree sequence is given, 2m degree-constrained ones.
    Candidate seeds are master_seed + index; failures are recorded per
    candidate, never dropped silently."""
    if m < 1:
        raise ConfigurationError("candidate count m must be >= 1")
    plan = [("mean", False)] * m + [("median", False)] * m
    if constraint is not None:
        plan += [("mean", True)] * m + [("median", True)] * m
    out = []
    for index, (source, constrained) in enumerate(plan):
        theta = theta_mean if source == "mean" else theta_median
        seed = master_seed + index
        try:
            if constrained:
                cfg = SamplerConfig(
                    burn_in=burn_in, thin=thin, seed=seed,
                    proposal="degree_swap", init="degree", n_samples=1,
                )
                ss = sample_degree_constrained(model, theta, constraint, cfg, attrs=attrs)
            else:
                cfg = SamplerConfig(
                    burn_in=burn_in, thin=thin, seed=seed,
                    proposal="toggle", init="empty", n_samples=1,
                )
                ss = sample_networks(model, theta, n, cfg, attrs=attrs)
            out.append(Candidate(index, source, constrained, seed, ss.graphs[0]))
        except BrainrepError as exc:
            out.append(Candidate(index, source, constrained, seed, None, error=str(exc)))
    return out


K_INDEX = PROFILE_COLUMNS.index("K")


def euclidean_distance(profile, reference, include_k: bool = True) -> float:
    """Distance over the raw (unscaled) seven-metric vectors."""
    a = np.asarray(profile, dtype=np.float64)
    b = np.asarray(reference, dtype=np.float64)
    if not include_k:
        mask = np.ones(a.size, dtype=bool)
        mask[K_INDEX] = False
        a = a[mask]
        b = b[mask]
    return float(np.sqrt(((a - b) ** 2).sum()))


def _profile_vector(name: str, profile: MetricProfile) -> np.ndarray:
    try:
        return np.array(profile.as_vector())
    except DegenerateGraphError as exc:
        raise AssessmentError(f"network {name!r}: {exc}") from exc


def mean_profile(profiles: list[MetricProfile], names: list[str]) -> np.ndarray:
    vecs = [_profile_vector(nm, p) for nm, p in zip(names, profiles)]
    return np.stack(vecs).mean(axis=0)


def median_profile(profiles: list[MetricProfile], names: list[str]) -> np.ndarray:
    vecs = [_profile_vector(nm, p) for nm, p in zip(names, profiles)]
    return np.median(np.stack(vecs), axis=0)


@dataclass
class AssessmentRow:
    name: str
    kind: str  # "reference" | "edge_based" | "candidate"
    family: str | None  # "mean" | "median"
    constrained: bool | None
    vector: np.ndarray | None
    distance_with_k: float | None
    distance_without_k: float | None
    candidate_index: int | None = None
    error: str | None = None


@dataclass
class AssessmentTable:
    rows: list[AssessmentRow]
    reference_mean: np.ndarray
    reference_median: np.ndarray
    best_mean_candidate: int | None
    best_median_candidate: int | None
    best_overall: int | None  # candidate index of the selected representative

    def to_csv(self) -> str:
        header = (
            "name,kind,family,constrained,"
            + ",".join(PROFILE_COLUMNS)
            + ",distance_with_K,distance_without_K,error"
        )
        lines = [header]
        for row in self.rows:
            cells = [
                row.name,
                row.kind,
                row.family or "",
                "" if row.constrained is None else str(int(row.constrained)),
            ]
            if row.vector is None:
                cells += [""] * len(PROFILE_COLUMNS)
            else:
                cells += [repr(float(v)) for v in row.vector]
            cells.append("" if row.distance_with_k is None else repr(row.distance_with_k))
            cells.append(
                "" if row.distance_without_k is None else repr(row.distance_without_k)
            )
            cells.append(row.error or "")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def assess_profile_rows(
    candidate_rows: list[tuple[str, str, bool | None, np.ndarray]],
    reference_mean: np.ndarray,
    reference_median: np.ndarray,
) -> list[AssessmentRow]:
    """Distance bookkeeping on prepared metric vectors (mean-derived rows
    score against the group-mean profile, median-derived against the group
    median)."""
    rows = []
    for name, family, constrained, vec in candidate_rows:
        ref = reference_mean if family == "mean" else reference_median
        rows.append(
            AssessmentRow(
                name=name,
                kind="candidate",
                family=family,
                constrained=constrained,
                vector=vec,
                distance_with_k=euclidean_distance(vec, ref, include_k=True),
                distance_without_k=euclidean_distance(vec, ref, include_k=False),
            )
        )
    return rows


def assess_candidates(
    candidates: list[Candidate],
    subjects: SubjectSet,
    edge_based: dict[str, Graph] | None = None,
) -> AssessmentTable:
    """Profile every network and rank candidates by distance to the group."""
    names = subjects.ids()
    subject_profiles = [metric_profile(g) for g in subjects.graphs()]
    ref_mean = mean_profile(subject_profiles, names)
    ref_median = median_profile(subject_profiles, names)
    rows = [
        AssessmentRow("subject_mean", "reference", "mean", None, ref_mean, None, None),
        AssessmentRow("subject_median", "reference", "median", None, ref_median, None, None),
    ]
    if edge_based:
        for family in ("mean", "median"):
            g = edge_based.get(family)
            if g is None:
                continue
            vec = _profile_vector(f"edge_based_{family}", metric_profile(g))
            ref = ref_mean if family == "mean" else ref_median
            rows.append(
                AssessmentRow(
                    name=f"edge_based_{family}",
                    kind="edge_based",
                    family=family,
                    constrained=None,
                    vector=vec,
                    distance_with_k=euclidean_distance(vec, ref, include_k=True),
                    distance_without_k=euclidean_distance(vec, ref, include_k=False),
                )
            )
    best = {"mean": (math.inf, None), "median": (math.inf, None)}
    best_overall = (math.inf, None)
    for cand in candidates:
        tag = "constrained" if cand.constrained else "unconstrained"
        name = f"{tag}_{cand.source}_{cand.index}"
        if cand.graph is None:
            rows.append(
                AssessmentRow(
                    name=name, kind="candidate", family=cand.source,
                    constrained=cand.constrained, vector=None,
                    distance_with_k=None, distance_without_k=None,
                    candidate_index=cand.index, error=cand.error,
                )
            )
            continue
        vec = _profile_vector(name, metric_profile(cand.graph))
        ref = ref_mean if cand.source == "mean" else ref_median
        d_with = euclidean_distance(vec, ref, include_k=True)
        d_without = euclidean_distance(vec, ref, include_k=False)
        rows.append(
            AssessmentRow(
                name=name, kind="candidate", family=cand.source,
                constrained=cand.constrained, vector=vec,
                distance_with_k=d_with, distance_without_k=d_without,
                candidate_index=cand.index,
            )
        )
        if d_with < best[cand.source][0]:
            best[cand.source] = (d_with, cand.index)
        if d_with < best_overall[0]:
            best_overall = (d_with, cand.index)
    return AssessmentTable(
        rows=rows,
        reference_mean=ref_mean,
        reference_median=ref_median,
        best_mean_candidate=best["mean"][1],
        best_median_candidate=best["median"][1],
        best_overall=best_overall[1],
    )


@dataclass
class PipelineConfig:
    s: float = 2.8
    tau: float = 0.75
    model: ModelSpec | None = None  # None selects per subject, then pools
    m: int = 5
    seed: int = 0
    constrained: bool = True
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    candidate_burn_in: int = 50_000
    candidate_thin: int = 10_000
    group_threshold_mode: str = "density"
    group_threshold_value: float = 0.0
    gof_nsim: int = 100
    selection: SelectionConfig | None = None
    jobs: int = 1


@dataclass
class PipelineResult:
    model: ModelSpec
    fits: list[FitResult]
    theta_mean: np.ndarray
    theta_median: np.ndarray
    reference_subject: str
    reference_ranking: list[tuple[str, float]]
    candidates: list[Candidate]
    table: AssessmentTable
    representative_index: int | None
    representative: Graph | None
    subject_profiles: dict[str, MetricProfile]
    edge_based: dict[str, Graph]
    gof_reports: dict[str, GofReport]
    selection_audits: dict | None = None


def theta_table_csv(
    ids: list[str],
    fits: list[FitResult],
    theta_mean: np.ndarray,
    theta_median: np.ndarray,
) -> str:
    """Per-subject coefficient table with mean/median summary rows."""
    labels = fits[0].model.labels
    lines = ["subject," + ",".join(labels)]
    for sid, fit in zip(ids, fits):
        lines.append(sid + "," + ",".join(repr(float(v)) for v in fit.theta))
    lines.append("mean," + ",".join(repr(float(v)) for v in theta_mean))
    lines.append("median," + ",".join(repr(float(v)) for v in theta_median))
    return "\n".join(lines) + "\n"


def run_pipeline(
    subjects: SubjectSet,
    config: PipelineConfig | None = None,
    attrs: NodeAttributes | None = None,
) -> PipelineResult:
    cfg = config or PipelineConfig()
    if len(subjects) < 2:
        raise PipelineError("threshold", "pipeline needs at least two subjects")

    # stage: threshold every subject still carrying a raw matrix
    try:
        for subj in subjects:
            if subj.graph is None:
                subj.graph = threshold_to_density(subj.matrix, cfg.s)
    except BrainrepError as exc:
        raise PipelineError("threshold", str(exc)) from exc

    have_matrices = all(s.matrix is not None for s in subjects)
    edge_based: dict[str, Graph] = {}
    if have_matrices:
        try:
            for family in ("mean", "median"):
                edge_based[family] = group_correlation_network(
                    subjects, family, cfg.s,
                    cfg.group_threshold_mode, cfg.group_threshold_value,
                )
        except BrainrepError as exc:
            raise PipelineError("group_network", str(exc)) from exc

    # stage: group model
    selection_audits = None
    if cfg.model is not None:
        model = cfg.model
    else:
        sel_cfg = cfg.selection or SelectionConfig(
            tau=cfg.tau, estimator=cfg.estimator, seed=cfg.seed
        )
        selection_audits = {}
        specs = []
        try:
            for idx, subj in enumerate(subjects):
                res = select_model(
                    subj.graph, attrs, replace(sel_cfg, seed=_seed_for(cfg.seed, 7, idx))
                )
                specs.append(res.model)
                selection_audits[subj.id] = res.audit
            model = derive_group_model(specs)
        except BrainrepError as exc:
            raise PipelineError("select_model", str(exc)) from exc

    # stage: fit the group model to every subject (parallel across subjects)
    def fit_one(idx_subj):
        idx, subj = idx_subj
        est = replace(cfg.estimator, seed=_seed_for(cfg.seed, 11, idx))
        return mcmc_mle(subj.graph, model, est, attrs=attrs if model.needs_attributes else None)

    try:
        tasks = list(enumerate(subjects))
        if cfg.jobs > 1:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                fits = list(pool.map(fit_one, tasks))
        else:
            fits = [fit_one(t) for t in tasks]
    except BrainrepError as exc:
        raise PipelineError("fit", str(exc)) from exc
    bad = [subjects.subjects[k].id for k, f in enumerate(fits) if not f.converged]
    if bad:
        raise PipelineError("fit", f"estimation did not converge for subjects {bad}")

    # stage: coefficient summaries
    try:
        theta_mean = group_theta(fits, "mean")
        theta_median = group_theta(fits, "median")
    except BrainrepError as exc:
        raise PipelineError("summarize", str(exc)) from exc

    # stage: reference subject for the degree constraint
    try:
        reference_id, ranking = pick_reference_subject(subjects)
        ref_graph = next(s.graph for s in subjects if s.id == reference_id)
        constraint = degree_sequence(ref_graph) if cfg.constrained else None
    except BrainrepError as exc:
        raise PipelineError("reference", str(exc)) from exc

    # stage: candidate simulation
    try:
        candidates = generate_candidates(
            model, theta_mean, theta_median, subjects.n, cfg.m,
            constraint=constraint,
            burn_in=cfg.candidate_burn_in, thin=cfg.candidate_thin,
            master_seed=cfg.seed,
            attrs=attrs if model.needs_attributes else None,
        )
    except BrainrepError as exc:
        raise PipelineError("simulate", str(exc)) from exc

    # stage: assessment
    try:
        table = assess_candidates(candidates, subjects, edge_based)
    except BrainrepError as exc:
        raise PipelineError("assess", str(exc)) from exc

    representative = None
    if table.best_overall is not None:
        representative = candidates[table.best_overall].graph

    gof_reports: dict[str, GofReport] = {}
    if cfg.gof_nsim >= 2:
        try:
            for idx, (subj, fit) in enumerate(zip(subjects, fits)):
                gcfg = GofConfig(nsim=cfg.gof_nsim, seed=_seed_for(cfg.seed, 13, idx))
                gof_reports[subj.id] = gof_report(
                    subj.graph, model, fit.theta, gcfg,
                    attrs=attrs if model.needs_attributes else None,
                )
        except BrainrepError as exc:
            raise PipelineError("gof", str(exc)) from exc

    subject_profiles = {
        s.id: metric_profile(s.graph) for s in subjects
    }
    return PipelineResult(
        model=model,
        fits=fits,
        theta_mean=theta_mean,
        theta_median=theta_median,
        reference_subject=reference_id,
        reference_ranking=ranking,
        candidates=candidates,
        table=table,
        representative_index=table.best_overall,
        representative=representative,
        subject_profiles=subject_profiles,
        edge_based=edge_based,
        gof_reports=gof_reports,
        selection_audits=selection_audits,
    )
