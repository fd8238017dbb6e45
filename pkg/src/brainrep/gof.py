"""Graphical goodness-of-fit diagnostics, a scalar discrepancy score, and
stepwise model selection.

A report tabulates four diagnostic distributions (degree, edgewise shared
partners, geodesic distance with an unreachable bin, triad census) of the
observed network against per-bin quantile envelopes over simulated networks.
The score condenses a report into one number: per diagnostic, the mean over
occupied bins of |observed - simulated median| / max(IQR, 1); lower is
better and 0 means the observed curve sits exactly on the simulated medians.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BrainrepError,
    ConfigurationError,
    ModelSelectionError,
)
from .estimator import EstimatorConfig, FitResult, mcmc_mle, _seed_for
from .graph import Graph, NodeAttributes, shared_partner_distributions
from .metrics import triad_census
from .sampler import SamplerConfig, sample_networks
from .terms import KIND_ORDER, ModelSpec, TermSpec

_QUANTS = (0.05, 0.25, 0.50, 0.75, 0.95)


@dataclass(frozen=True)
class GofConfig:
    nsim: int = 100
    burn_in: int | None = None
    thin: int | None = None
    seed: int = 0
    include_nsp: bool = False  # optional fifth diagnostic


@dataclass
class DiagnosticTable:
    bins: list[str]
    observed: np.ndarray
    sim_min: np.ndarray
    q05: np.ndarray
    q25: np.ndarray
    q50: np.ndarray
    q75: np.ndarray
    q95: np.ndarray
    sim_max: np.ndarray


@dataclass
class GofReport:
    diagnostics: dict[str, DiagnosticTable]
    nsim: int
    model: ModelSpec
    theta: np.ndarray

    def to_json(self) -> str:
        doc = {
            "nsim": self.nsim,
            "model": json.loads(self.model.to_json()),
            "theta": [float(v) for v in self.theta],
            "diagnostics": {
                name: {
                    "bins": tab.bins,
                    "observed": [int(v) for v in tab.observed],
                    "min": [float(v) for v in tab.sim_min],
                    "q05": [float(v) for v in tab.q05],
                    "q25": [float(v) for v in tab.q25],
                    "median": [float(v) for v in tab.q50],
                    "q75": [float(v) for v in tab.q75],
                    "q95": [float(v) for v in tab.q95],
                    "max": [float(v) for v in tab.sim_max],
                }
                for name, tab in self.diagnostics.items()
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        lines = ["diagnostic,bin,observed,min,q05,q25,median,q75,q95,max"]
        for name, tab in self.diagnostics.items():
            for b in range(len(tab.bins)):
                lines.append(
                    f"{name},{tab.bins[b]},{int(tab.observed[b])},"
                    f"{tab.sim_min[b]!r},{tab.q05[b]!r},{tab.q25[b]!r},"
                    f"{tab.q50[b]!r},{tab.q75[b]!r},{tab.q95[b]!r},{tab.sim_max[b]!r}"
                )
        return "\n".join(lines) + "\n"


@dataclass
class GofScore:
    parts: dict[str, float]
    total: float


def _degree_counts(g: Graph) -> np.ndarray:
    deg = g.adjacency_matrix().sum(axis=1)
    return np.bincount(deg, minlength=g.n).astype(np.int64)


def _esp_counts(g: Graph) -> np.ndarray:
    return shared_partner_distributions(g).esp


def _nsp_counts(g: Graph) -> np.ndarray:
    return shared_partner_distributions(g).nsp


def _geodesic_counts(g: Graph) -> np.ndarray:
    # bins: hop distances 1..n-1, then one unreachable bin
    dist = g.hop_distances()
    iu, ju = np.triu_indices(g.n, 1)
    vals = dist[iu, ju]
    finite = np.isfinite(vals)
    counts = np.bincount(vals[finite].astype(np.int64), minlength=g.n)[1:]
    return np.concatenate([counts, [np.count_nonzero(~finite)]]).astype(np.int64)


def _triad_counts(g: Graph) -> np.ndarray:
    return np.array(triad_census(g).as_tuple(), dtype=np.int64)


def _diagnostic_defs(n: int, include_nsp: bool):
    defs = [
        ("degree", _degree_counts, [str(k) for k in range(n)]),
        ("esp", _esp_counts, [str(k) for k in range(n - 1)]),
        ("geodesic", _geodesic_counts, [str(k) for k in range(1, n)] + ["unreachable"]),
        ("triad", _triad_counts, ["empty", "one_edge", "two_path", "triangle"]),
    ]
    if include_nsp:
        defs.insert(2, ("nsp", _nsp_counts, [str(k) for k in range(n - 1)]))
    return defs


def gof_report(
    g: Graph,
    model: ModelSpec,
    theta,
    config: GofConfig | None = None,
    attrs: NodeAttributes | None = None,
) -> GofReport:
    """Simulate nsim networks at theta and tabulate the diagnostics."""
    cfg = config or GofConfig()
    if cfg.nsim < 2:
        raise ConfigurationError("gof needs nsim >= 2")
    n = g.n
    n_dyads = n * (n - 1) // 2
    burn = cfg.burn_in if cfg.burn_in is not None else 10 * n_dyads
    thin = cfg.thin if cfg.thin is not None else 2 * n_dyads
    sc = SamplerConfig(
        burn_in=burn, thin=thin, seed=cfg.seed, proposal="toggle",
        init="observed", n_samples=cfg.nsim,
    )
    sims = sample_networks(model, theta, n, sc, attrs=attrs, init_graph=g).graphs
    diagnostics = {}
    for name, fn, bins in _diagnostic_defs(n, cfg.include_nsp):
        observed = fn(g)
        table = np.stack([fn(s) for s in sims]).astype(np.float64)
        qs = np.quantile(table, _QUANTS, axis=0)
        diagnostics[name] = DiagnosticTable(
            bins=bins,
            observed=observed,
            sim_min=table.min(axis=0),
            q05=qs[0],
            q25=qs[1],
            q50=qs[2],
            q75=qs[3],
            q95=qs[4],
            sim_max=table.max(axis=0),
        )
    return GofReport(
        diagnostics=diagnostics, nsim=cfg.nsim, model=model,
        theta=np.asarray(theta, dtype=np.float64),
    )


def gof_score(report: GofReport) -> GofScore:
    """Median-centered, IQR-normalized L1 discrepancy, summed over diagnostics."""
    parts = {}
    for name, tab in report.diagnostics.items():
        occupied = (tab.observed > 0) | (tab.q50 > 0)
        if not occupied.any():
            parts[name] = 0.0
            continue
        iqr = np.maximum(tab.q75 - tab.q25, 1.0)
        dev = np.abs(tab.observed - tab.q50) / iqr
        parts[name] = float(dev[occupied].mean())
    return GofScore(parts=parts, total=float(sum(parts.values())))


@dataclass(frozen=True)
class SelectionConfig:
    tau: float = 0.75
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    gof: GofConfig = field(default_factory=GofConfig)
    seed: int = 0


@dataclass
class CandidateAudit:
    step: str
    model: ModelSpec
    score: float | None
    converged: bool
    error: str | None = None


@dataclass
class SelectionResult:
    model: ModelSpec
    fit: FitResult
    audit: list[CandidateAudit]


def _evaluate_candidate(step, index, g, model, attrs, cfg):
    """Fit + score one candidate model; failures are recorded, not raised."""
    use_attrs = attrs if model.needs_attributes else None
    est_cfg = replace(cfg.estimator, seed=_seed_for(cfg.seed, 100 + index, 0))
    try:
        fit = mcmc_mle(g, model, est_cfg, attrs=use_attrs)
    except BrainrepError as exc:
        return CandidateAudit(step, model, None, False, str(exc)), None
    if not fit.converged:
        return CandidateAudit(step, model, None, False, "estimation did not converge"), fit
    gof_cfg = replace(cfg.gof, seed=_seed_for(cfg.seed, 200 + index, 0))
    report = gof_report(g, model, fit.theta, gof_cfg, attrs=use_attrs)
    score = gof_score(report).total
    return CandidateAudit(step, model, score, True, None), fit


def _pick_best(entries):
    """Lowest score wins; exact ties go to the model with fewer terms."""
    scored = [(a, f) for a, f in entries if a.score is not None]
    if not scored:
        raise ModelSelectionError(
            f"no candidate converged at step {entries[0][0].step!r}"
        )
    best = min(
        range(len(scored)),
        key=lambda k: (scored[k][0].score, len(scored[k][0].model.terms), k),
    )
    return scored[best]


def select_model(
    g: Graph,
    attrs: NodeAttributes | None,
    config: SelectionConfig | None = None,
) -> SelectionResult:
    """Four-step stepwise selection over the standard term pools.

    Step 1 picks the connectedness term (edges vs two-path count), step 2 the
    local-clustering term (GWESP vs GWDSP), step 3 compares the four-term
    model against its four three-term submodels, and step 4 keeps a nodematch
    term only if it improves the score.  Candidates that fail to converge are
    excluded from their comparison but kept in the audit trail.
    """
    cfg = config or SelectionConfig()
    tau = cfg.tau
    gwesp = TermSpec("gwesp", tau=tau)
    gwdsp = TermSpec("gwdsp", tau=tau)
    gwnsp = TermSpec("gwnsp", tau=tau)
    gwd = TermSpec("gwd", tau=tau)
    audit: list[CandidateAudit] = []
    counter = 0

    def evaluate(step, terms):
        nonlocal counter
        counter += 1
        entry = _evaluate_candidate(step, counter, g, ModelSpec(tuple(terms)), attrs, cfg)
        audit.append(entry[0])
        return entry

    # step 1: connectedness metric
    step1 = [
        evaluate("step1", [TermSpec("edges"), gwesp, gwdsp, gwnsp, gwd]),
        evaluate("step1", [TermSpec("two_path"), gwesp, gwdsp, gwnsp, gwd]),
    ]
    best1, _ = _pick_best(step1)
    conn = best1.model.terms[0]

    # step 2: local clustering/efficiency metric
    step2 = [
        evaluate("step2", [conn, gwesp, gwnsp, gwd]),
        evaluate("step2", [conn, gwdsp, gwnsp, gwd]),
    ]
    best2, _ = _pick_best(step2)
    local = best2.model.terms[1]

    # step 3: the four-term model against every three-term submodel
    full = [conn, local, gwnsp, gwd]
    step3 = [evaluate("step3", full)]
    for drop in range(4):
        sub = [term for k, term in enumerate(full) if k != drop]
        step3.append(evaluate("step3", sub))
    best3, fit3 = _pick_best(step3)

    # step 4: nodal location
    if attrs is not None:
        terms4 = list(best3.model.terms) + [TermSpec("nodematch", attribute="label")]
        cand4 = evaluate("step4", terms4)
        if cand4[0].score is not None and cand4[0].score < best3.score:
            return SelectionResult(cand4[0].model, cand4[1], audit)
    return SelectionResult(best3.model, fit3, audit)


def derive_group_model(specs: list[ModelSpec]) -> ModelSpec:
    """Terms appearing in at least half of the per-subject best models.

    Within the mutually exclusive pairs (edges vs two-path, GWESP vs GWDSP)
    only the more prevalent survivor is kept, ties broken by the canonical
    term order.
    """
    if not specs:
        raise ModelSelectionError("no per-subject models given")
    counts: dict[TermSpec, int] = {}
    for spec in specs:
        for term in spec.terms:
            counts[term] = counts.get(term, 0) + 1
    total = len(specs)
    kept = [t for t, c in counts.items() if 2 * c >= total]
    for pair in (("edges", "two_path"), ("gwesp", "gwdsp")):
        members = [t for t in kept if t.kind in pair]
        if len(members) > 1:
            members.sort(key=lambda t: (-counts[t], KIND_ORDER.index(t.kind)))
            for loser in members[1:]:
                kept.remove(loser)
    if not kept:
        raise ModelSelectionError("no term reached 50% prevalence")
    kept.sort(key=lambda t: (KIND_ORDER.index(t.kind), t.tau or 0.0, t.k or 0))
    return ModelSpec(tuple(kept))
