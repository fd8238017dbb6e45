"""Coefficient estimation: pseudo-likelihood, Monte Carlo MLE, exact enumeration.

The Monte Carlo MLE is a hybrid: stochastic-approximation moment-matching
updates move the coefficients into the right neighborhood, then an
importance-sampling refinement maximizes the log-likelihood-ratio
approximation on one large simulated sample.  Exhaustive enumeration over all
graphs (small n only) provides exact likelihoods and the moment-matching
oracle used to validate the Monte Carlo path.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass

import numpy as np

from ._kernels import gray_enum
from .errors import (
    ConfigurationError,
    DegeneracyError,
    DegenerateGraphError,
    EnumerationLimitError,
)
from .graph import Graph, NodeAttributes
from .sampler import SamplerConfig, sample_networks
from .terms import ModelSpec, change_stats_all_dyads, eval_stats, term_arrays

EXACT_HARD_CAP = 7


@dataclass(frozen=True)
class EstimatorConfig:
    sample_size: int = 512  # chain samples per stochastic-approximation step
    refine_size: int = 2048  # importance sample per refinement round
    max_iterations: int = 30
    refine_rounds: int = 4
    refine_tol: float = 0.01  # stop refining once theta moves less than this
    t_ratio_threshold: float = 0.1
    gain_a0: float = 1.0
    gain_t0: float = 2.0
    ridge: float = 1e-6
    seed: int = 0
    burn_in: int | None = None  # sampler overrides; defaults scale with dyad count
    thin: int | None = None
    refine_thin: int | None = None  # refinement/diagnostic samples need lower autocorrelation
    exact_limit: int = 6
    init_theta: tuple | None = None  # overrides the pseudo-likelihood start


@dataclass
class FitResult:
    theta: np.ndarray
    std_errors: np.ndarray
    converged: bool
    method: str
    model: ModelSpec
    diagnostics: dict | None = None

    def to_json(self) -> str:
        doc = {
            "method": self.method,
            "converged": bool(self.converged),
            "model": json.loads(self.model.to_json()),
            "term_labels": list(self.model.labels),
            "theta": [float(v) for v in self.theta],
            "std_errors": [float(v) for v in self.std_errors],
        }
        if self.diagnostics is not None:
            diag = {}
            for key, val in self.diagnostics.items():
                if isinstance(val, np.ndarray):
                    diag[key] = [float(v) for v in val]
                else:
                    diag[key] = val
            doc["diagnostics"] = diag
        return json.dumps(doc, indent=2, sort_keys=True)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def mple(g: Graph, model: ModelSpec, attrs: NodeAttributes | None = None) -> FitResult:
    """Maximum pseudo-likelihood: logistic regression of the edge indicator
    on per-dyad change statistics, solved by iteratively reweighted least
    squares.  Separation is flagged as non-convergence with the last iterate
    returned."""
    x = change_stats_all_dyads(g, model, attrs)
    iu, ju = np.triu_indices(g.n, 1)
    y = g.adjacency_matrix()[iu, ju].astype(np.float64)
    p = model.p
    beta = np.zeros(p)
    converged = False
    hess = np.eye(p)
    for _ in range(100):
        mu = _sigmoid(x @ beta)
        grad = x.T @ (y - mu)
        if np.linalg.norm(grad) < 1e-8:
            converged = True
            break
        w = mu * (1.0 - mu)
        hess = x.T @ (x * w[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        beta = beta + step
        if np.max(np.abs(beta)) > 30 or not np.all(np.isfinite(beta)):
            beta = np.clip(np.nan_to_num(beta, nan=0.0, posinf=30, neginf=-30), -30, 30)
            break
    # separated data drives coefficients toward infinity while the gradient
    # still vanishes; a huge iterate is non-convergence, not a solution
    if np.max(np.abs(beta)) > 15:
        converged = False
    se = np.sqrt(np.clip(np.diag(np.linalg.pinv(hess)), 0.0, None))
    return FitResult(theta=beta, std_errors=se, converged=converged, method="mple", model=model)


class ExactEnsemble:
    """Statistic vectors of every graph on n nodes, enumerated once.

    Enumeration walks the graph space in Gray-code order, toggling one dyad
    per step and accumulating change statistics.
    """

    def __init__(self, n: int, model: ModelSpec, attrs: NodeAttributes | None = None,
                 limit: int = 6):
        if n > EXACT_HARD_CAP:
            raise EnumerationLimitError(f"n={n} exceeds the hard cap {EXACT_HARD_CAP}")
        if n > limit:
            raise EnumerationLimitError(f"n={n} exceeds the configured limit {limit}")
        self.n = n
        self.model = model
        codes, params, wtabs, labels = term_arrays(model, n, attrs)
        start = Graph.empty(n)
        adj, deg, nbrs, pos, sp = start.kernel_state()
        iu, ju = np.triu_indices(n, 1)
        self._dyads = (iu.astype(np.int64), ju.astype(np.int64))
        base = eval_stats(start, model, attrs)
        n_graphs = 1 << iu.size
        stats = np.empty((n_graphs, model.p), dtype=np.float64)
        gray_enum(
            adj, deg, nbrs, pos, sp, labels, codes, params, wtabs,
            self._dyads[0], self._dyads[1], base, stats,
        )
        self.stats = stats

    def mask_of(self, g: Graph) -> int:
        n = self.n
        mask = 0
        for i, j in g.edges:
            idx = i * (2 * n - i - 1) // 2 + (j - i - 1)
            mask |= 1 << idx
        return mask

    def log_kappa(self, theta: np.ndarray) -> float:
        lw = self.stats @ theta
        top = lw.max()
        return float(top + np.log(np.exp(lw - top).sum()))

    def probabilities(self, theta: np.ndarray) -> np.ndarray:
        lw = self.stats @ theta
        lw -= lw.max()
        w = np.exp(lw)
        return w / w.sum()

    def moments(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        w = self.probabilities(theta)
        mean = w @ self.stats
        diff = self.stats - mean
        cov = diff.T @ (diff * w[:, None])
        return mean, cov


@functools.lru_cache(maxsize=16)
def _cached_ensemble(n, model, label_key, limit):
    attrs = NodeAttributes(label_key) if label_key is not None else None
    return ExactEnsemble(n, model, attrs, limit)


def _ensemble(g, model, attrs, limit):
    key = attrs.labels if attrs is not None else None
    return _cached_ensemble(g.n, model, key, limit)


def exact_loglik(
    theta,
    g: Graph,
    model: ModelSpec,
    attrs: NodeAttributes | None = None,
    limit: int = 6,
) -> float:
    """Exact log-likelihood with the normalizing constant from enumeration."""
    theta = np.asarray(theta, dtype=np.float64)
    ens = _ensemble(g, model, attrs, limit)
    gobs = eval_stats(g, model, attrs)
    return float(theta @ gobs - ens.log_kappa(theta))


def exact_mle(
    g: Graph,
    model: ModelSpec,
    attrs: NodeAttributes | None = None,
    limit: int = 6,
) -> FitResult:
    """Newton iteration on the exact log-likelihood (small n only)."""
    ens = _ensemble(g, model, attrs, limit)
    gobs = eval_stats(g, model, attrs)
    p = model.p
    theta = np.zeros(p)
    converged = False
    cov = np.eye(p)

    def ll(th):
        return float(th @ gobs - ens.log_kappa(th))

    for _ in range(200):
        mean, cov = ens.moments(theta)
        grad = gobs - mean
        if np.linalg.norm(grad) < 1e-10:
            converged = True
            break
        try:
            step = np.linalg.solve(cov + 1e-12 * np.eye(p), grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(cov, grad, rcond=None)[0]
        base = ll(theta)
        scale = 1.0
        cand = theta + step
        for _ in range(60):
            cand = theta + scale * step
            if ll(cand) >= base - 1e-12:
                break
            scale *= 0.5
        theta = cand
        if np.max(np.abs(theta)) > 50:
            break  # observed statistics on the hull boundary; no finite MLE
    try:
        se = np.sqrt(np.diag(np.linalg.inv(cov)))
    except np.linalg.LinAlgError:
        se = np.sqrt(np.abs(np.diag(np.linalg.pinv(cov))))
    return FitResult(theta=theta, std_errors=se, converged=converged, method="exact", model=model)


def _seed_for(base_seed: int, phase: int, index: int) -> int:
    return int(np.random.SeedSequence([base_seed, phase, index]).generate_state(1)[0])


def _solve(a, b):
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(a, b, rcond=None)[0]


def _collapse_guard(sample_set):
    # Degenerate pmfs concentrate on empty/complete graphs and stall the fit;
    # name the statistic whose variance collapsed hardest.
    n = sample_set.adjacency.shape[1]
    n_dyads = n * (n - 1) // 2
    edge_counts = sample_set.edge_counts()
    frac = np.mean((edge_counts == 0) | (edge_counts == n_dyads))
    sd = sample_set.stats.std(axis=0, ddof=1)
    labels = sample_set.model.labels
    if frac > 0.95:
        term = labels[int(np.argmin(sd))]
        raise DegeneracyError(term, f"{frac:.0%} of simulated graphs are empty/complete")
    return sd


def _t_ratios(mean, gobs, sd):
    # zero sample variance: exact match scores 0, any mismatch scores inf
    gap = np.abs(mean - gobs)
    out = np.full_like(gap, np.inf)
    np.divide(gap, sd, out=out, where=sd > 0)
    out[(sd == 0) & (gap == 0)] = 0.0
    return out


def mcmc_mle(
    g: Graph,
    model: ModelSpec,
    config: EstimatorConfig | None = None,
    attrs: NodeAttributes | None = None,
) -> FitResult:
    """Monte Carlo maximum likelihood, initialized at the pseudo-likelihood fit."""
    cfg = config or EstimatorConfig()
    if cfg.sample_size < 100:
        raise ConfigurationError("mcmc_mle needs sample_size >= 100")
    n = g.n
    n_dyads = n * (n - 1) // 2
    m = len(g.edges)
    if m == 0 or m == n_dyads:
        raise DegenerateGraphError("observed graph is empty or complete; MLE does not exist")
    gobs = eval_stats(g, model, attrs)
    p = model.p
    burn = cfg.burn_in if cfg.burn_in is not None else 5 * n_dyads
    thin = cfg.thin if cfg.thin is not None else max(1, n_dyads // 2)
    refine_thin = cfg.refine_thin if cfg.refine_thin is not None else max(thin, 2 * n_dyads)

    def run(theta, n_samples, seed, step=thin):
        sc = SamplerConfig(
            burn_in=burn, thin=step, seed=seed, proposal="toggle",
            init="observed", n_samples=n_samples,
        )
        return sample_networks(model, theta, n, sc, attrs=attrs, init_graph=g)

    if cfg.init_theta is not None:
        theta = np.asarray(cfg.init_theta, dtype=np.float64).copy()
        if theta.shape != (p,):
            raise ConfigurationError("init_theta length does not match the model")
    else:
        start = mple(g, model, attrs)
        theta = np.clip(start.theta, -10.0, 10.0)
    ridge = cfg.ridge * np.eye(p)

    # the cheap stochastic-approximation samples only need to land in the
    # refinement's basin; the exit bar is independent of the final threshold
    sa_exit = max(0.3, cfg.t_ratio_threshold)
    iterations = 0
    for t in range(1, cfg.max_iterations + 1):
        iterations = t
        ss = run(theta, cfg.sample_size, _seed_for(cfg.seed, 1, t))
        sd = _collapse_guard(ss)
        mean = ss.stats.mean(axis=0)
        if np.all(_t_ratios(mean, gobs, sd) < sa_exit):
            break
        cov = np.cov(ss.stats.T).reshape(p, p) + ridge
        gain = cfg.gain_a0 / (t + cfg.gain_t0)
        step = gain * _solve(cov, gobs - mean)
        # clamp: near-singular covariance directions must not fling theta away
        theta = theta + np.clip(step, -0.5, 0.5)

    # importance-sampling refinement: sample at the current theta, maximize
    # the log-likelihood-ratio approximation, and repeat from the new point
    # until the estimate stops moving
    for rnd in range(cfg.refine_rounds):
        ss = run(theta, cfg.refine_size, _seed_for(cfg.seed, 2, rnd), step=refine_thin)
        _collapse_guard(ss)
        sims = ss.stats
        big = sims.shape[0]
        theta0 = theta.copy()
        at_optimum = False
        for _ in range(100):
            lw = sims @ (theta - theta0)
            lw -= lw.max()
            w = np.exp(lw)
            w /= w.sum()
            mean = w @ sims
            diff = sims - mean
            cov = diff.T @ (diff * w[:, None]) + ridge
            grad = gobs - mean
            sdw = np.sqrt(np.maximum(np.diag(cov), 1e-12))
            if np.max(np.abs(grad) / sdw) < 1e-3:
                at_optimum = True
                break
            step = _solve(cov, grad)
            moved = False
            for _ in range(30):
                cand = theta + step
                lw2 = sims @ (cand - theta0)
                lw2 -= lw2.max()
                w2 = np.exp(lw2)
                ess = w2.sum() ** 2 / (w2 @ w2)
                if ess >= max(50.0, 0.05 * big):
                    theta = cand
                    moved = True
                    break
                step = step / 2
            if not moved:
                # importance weights exhausted: the next round's fresh sample
                # at the new theta continues from here
                break
        if at_optimum and np.max(np.abs(theta - theta0)) < cfg.refine_tol:
            break

    # fresh diagnostic sample at the refined coefficients
    ssf = run(theta, cfg.refine_size, _seed_for(cfg.seed, 3, 0), step=refine_thin)
    sd = _collapse_guard(ssf)
    mean = ssf.stats.mean(axis=0)
    t_ratios = _t_ratios(mean, gobs, sd)
    converged = bool(np.all(t_ratios < cfg.t_ratio_threshold))
    cov = np.cov(ssf.stats.T).reshape(p, p) + ridge
    try:
        cinv = np.linalg.inv(cov)
    except np.linalg.LinAlgError:
        cinv = np.linalg.pinv(cov)
    std_errors = np.sqrt(np.maximum(np.diag(cinv), 0.0))
    # a statistic stuck at its observed value leaves its coefficient
    # unidentified by this sample; say so rather than report a tiny SE
    std_errors[sd == 0] = np.inf
    # Monte Carlo error of theta-hat: thinned-sample autocorrelation inflates
    # the usual 1/sqrt(M) rate per term.
    centered = ssf.stats - mean
    denom = (centered[:-1] * centered[:-1]).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(denom > 0, (centered[:-1] * centered[1:]).sum(axis=0) / denom, 0.0)
    rho = np.clip(rho, 0.0, 0.95)
    tau = (1 + rho) / (1 - rho)
    mcse = std_errors * np.sqrt(tau / ssf.stats.shape[0])
    diagnostics = {
        "t_ratios": t_ratios,
        "iterations": iterations,
        "sample_size": int(ssf.stats.shape[0]),
        "mc_std_errors": mcse,
        "acceptance_rate": ssf.acceptance_rate,
    }
    return FitResult(
        theta=theta,
        std_errors=std_errors,
        converged=converged,
        method="mcmc_mle",
        model=model,
        diagnostics=diagnostics,
    )
