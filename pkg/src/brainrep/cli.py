"""Command-line front end.

Subcommands: threshold | metrics | fit | select-model | simulate | gof |
assess | pipeline.  Every run writes a JSON manifest holding the resolved
arguments, so identical inputs and flags reproduce byte-identical outputs and
``--manifest FILE`` replays a previous run.  Randomized subcommands require
an explicit --seed.  All numeric output is full precision.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .errors import BrainrepError
from .estimator import EstimatorConfig, FitResult, exact_mle, mcmc_mle, mple
from .gof import GofConfig, SelectionConfig, gof_report, gof_score, select_model
from .graph import (
    Graph,
    degree_sequence,
    load_graph,
    load_node_attributes,
    save_graph,
)
from .metrics import (
    PROFILE_COLUMNS,
    metric_profile,
    nodal_cdf_csv,
    nodal_distributions,
    profile_table_csv,
)
from .pipeline import (
    Candidate,
    PipelineConfig,
    Subject,
    SubjectSet,
    assess_candidates,
    load_correlation_matrix,
    run_pipeline,
    theta_table_csv,
    threshold_at_value,
    threshold_to_density,
)
from .sampler import SamplerConfig, sample_degree_constrained, sample_networks
from .terms import ModelSpec, default_group_model


def _load_model(spec: str, tau: float) -> ModelSpec:
    if spec == "default":
        return default_group_model(tau)
    with open(spec, "r", encoding="utf-8") as fh:
        return ModelSpec.from_json(fh.read())


def _load_attrs(path, n):
    return load_node_attributes(path, n) if path else None


def _write(path: str, text: str, outputs: list[str]) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    outputs.append(path)


def _write_manifest(path: str, command: str, argv: list[str], outputs: list[str]) -> None:
    doc = {
        "command": command,
        "argv": argv,
        "outputs": sorted(os.path.basename(p) for p in outputs),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _estimator_config(args) -> EstimatorConfig:
    cfg = EstimatorConfig(seed=args.seed)
    if getattr(args, "sample_size", None) is not None:
        cfg = replace(cfg, sample_size=args.sample_size)
    if getattr(args, "refine_size", None) is not None:
        cfg = replace(cfg, refine_size=args.refine_size)
    if getattr(args, "max_iter", None) is not None:
        cfg = replace(cfg, max_iterations=args.max_iter)
    if getattr(args, "est_burn_in", None) is not None:
        cfg = replace(cfg, burn_in=args.est_burn_in)
    if getattr(args, "est_thin", None) is not None:
        cfg = replace(cfg, thin=args.est_thin)
    if getattr(args, "refine_rounds", None) is not None:
        cfg = replace(cfg, refine_rounds=args.refine_rounds)
    if getattr(args, "t_threshold", None) is not None:
        cfg = replace(cfg, t_ratio_threshold=args.t_threshold)
    return cfg


def _cmd_threshold(args, argv):
    mat = load_correlation_matrix(args.infile)
    if args.mode == "density":
        g = threshold_to_density(mat, args.s)
    else:
        g = threshold_at_value(mat, args.cutoff)
    outputs = []
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    save_graph(g, args.out)
    outputs.append(args.out)
    _write_manifest(args.out + ".manifest.json", "threshold", argv, outputs)
    print(f"{args.out}: n={g.n} edges={g.number_of_edges} "
          f"mean_degree={2 * g.number_of_edges / g.n!r}")
    return 0


def _cmd_metrics(args, argv):
    g = load_graph(args.infile)
    prof = metric_profile(g)
    print(",".join(PROFILE_COLUMNS))
    print(prof.to_csv_row())
    if args.out:
        outputs = []
        _write(args.out, prof.to_json() + "\n", outputs)
        if args.nodal:
            nd = nodal_distributions(g)
            _write(args.out + ".nodal.csv", nodal_cdf_csv(args.name, nd), outputs)
        _write_manifest(args.out + ".manifest.json", "metrics", argv, outputs)
    return 0


def _cmd_fit(args, argv):
    g = load_graph(args.infile)
    model = _load_model(args.model, args.tau)
    attrs = _load_attrs(args.attrs, g.n)
    if args.method == "mple":
        fit = mple(g, model, attrs)
    elif args.method == "exact":
        fit = exact_mle(g, model, attrs, limit=args.exact_limit)
    else:
        fit = mcmc_mle(g, model, _estimator_config(args), attrs)
    outputs = []
    _write(args.out, fit.to_json() + "\n", outputs)
    _write_manifest(args.out + ".manifest.json", "fit", argv, outputs)
    print(f"method={fit.method} converged={fit.converged} "
          f"theta={[float(v) for v in fit.theta]!r}")
    return 0


def _cmd_select_model(args, argv):
    g = load_graph(args.infile)
    attrs = _load_attrs(args.attrs, g.n)
    cfg = SelectionConfig(
        tau=args.tau,
        estimator=_estimator_config(args),
        gof=GofConfig(nsim=args.nsim, seed=args.seed),
        seed=args.seed,
    )
    res = select_model(g, attrs, cfg)
    outputs = []
    _write(os.path.join(args.out, "model.json"), res.model.to_json() + "\n", outputs)
    _write(os.path.join(args.out, "fit.json"), res.fit.to_json() + "\n", outputs)
    audit_lines = ["step,model,score,converged,error"]
    for entry in res.audit:
        desc = "+".join(t.label for t in entry.model.terms)
        score = "" if entry.score is None else repr(entry.score)
        audit_lines.append(
            f"{entry.step},{desc},{score},{int(entry.converged)},{entry.error or ''}"
        )
    _write(os.path.join(args.out, "audit.csv"), "\n".join(audit_lines) + "\n", outputs)
    _write_manifest(os.path.join(args.out, "manifest.json"), "select-model", argv, outputs)
    print("selected: " + "+".join(t.label for t in res.model.terms))
    return 0


def _theta_from_args(args, model) -> np.ndarray:
    if args.fit:
        with open(args.fit, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return np.array(doc["theta"], dtype=np.float64)
    if args.theta is None:
        raise BrainrepError("need --theta or --fit")
    vals = [float(v) for v in args.theta.split(",")]
    if len(vals) != model.p:
        raise BrainrepError(f"theta has {len(vals)} entries, model has {model.p} terms")
    return np.array(vals)


def _cmd_simulate(args, argv):
    model = _load_model(args.model, args.tau)
    theta = _theta_from_args(args, model)
    outputs = []
    candidates = []
    if args.constraint:
        ref_graph = load_graph(args.constraint)
        ref = degree_sequence(ref_graph)
        cfg = SamplerConfig(
            burn_in=args.burn_in, thin=args.thin, seed=args.seed,
            proposal="degree_swap", init="degree", n_samples=args.count,
        )
        ss = sample_degree_constrained(model, theta, ref, cfg)
    else:
        if args.n is None:
            raise BrainrepError("need --n or --constraint")
        cfg = SamplerConfig(
            burn_in=args.burn_in, thin=args.thin, seed=args.seed,
            proposal="toggle", init="empty", n_samples=args.count,
        )
        ss = sample_networks(model, theta, args.n, cfg)
    for k, g in enumerate(ss.graphs):
        name = f"sample_{k:04d}.edges"
        path = os.path.join(args.out, name)
        os.makedirs(args.out, exist_ok=True)
        save_graph(g, path)
        outputs.append(path)
        candidates.append({"file": name, "index": k, "seed": args.seed,
                           "constrained": bool(args.constraint), "source": args.source})
    doc = {
        "model": json.loads(model.to_json()),
        "theta": [float(v) for v in theta],
        "acceptance_rate": ss.acceptance_rate,
        "stats": [[float(v) for v in row] for row in ss.stats],
        "candidates": candidates,
    }
    _write(os.path.join(args.out, "candidates.json"),
           json.dumps(doc, indent=2, sort_keys=True) + "\n", outputs)
    _write_manifest(os.path.join(args.out, "manifest.json"), "simulate", argv, outputs)
    print(f"wrote {len(ss.graphs)} samples, acceptance={ss.acceptance_rate!r}")
    return 0


def _cmd_gof(args, argv):
    g = load_graph(args.infile)
    model = _load_model(args.model, args.tau)
    attrs = _load_attrs(args.attrs, g.n)
    theta = _theta_from_args(args, model)
    cfg = GofConfig(nsim=args.nsim, seed=args.seed, include_nsp=args.include_nsp)
    report = gof_report(g, model, theta, cfg, attrs)
    score = gof_score(report)
    outputs = []
    _write(os.path.join(args.out, "gof.json"), report.to_json() + "\n", outputs)
    _write(os.path.join(args.out, "gof.csv"), report.to_csv(), outputs)
    score_doc = {"parts": score.parts, "total": score.total}
    _write(os.path.join(args.out, "score.json"),
           json.dumps(score_doc, indent=2, sort_keys=True) + "\n", outputs)
    _write_manifest(os.path.join(args.out, "manifest.json"), "gof", argv, outputs)
    print(f"gof score total={score.total!r}")
    return 0


def _load_subjects(directory) -> SubjectSet:
    subjects = []
    for name in sorted(os.listdir(directory)):
        path = os.path.join(directory, name)
        stem, ext = os.path.splitext(name)
        if ext == ".csv":
            subjects.append(Subject(stem, matrix=load_correlation_matrix(path)))
        elif ext == ".edges":
            subjects.append(Subject(stem, graph=load_graph(path)))
    if not subjects:
        raise BrainrepError(f"no subject files (*.csv or *.edges) in {directory}")
    return SubjectSet(subjects)


def _cmd_assess(args, argv):
    subjects = _load_subjects(args.subjects)
    for subj in subjects:
        if subj.graph is None:
            subj.graph = threshold_to_density(subj.matrix, args.s)
    with open(os.path.join(args.candidates, "candidates.json"), encoding="utf-8") as fh:
        doc = json.load(fh)
    candidates = []
    for row in doc["candidates"]:
        g = load_graph(os.path.join(args.candidates, row["file"]))
        candidates.append(
            Candidate(row["index"], row["source"], row["constrained"], row["seed"], g)
        )
    edge_based = {}
    if args.edge_based_mean:
        edge_based["mean"] = load_graph(args.edge_based_mean)
    if args.edge_based_median:
        edge_based["median"] = load_graph(args.edge_based_median)
    table = assess_candidates(candidates, subjects, edge_based or None)
    outputs = []
    _write(os.path.join(args.out, "assessment.csv"), table.to_csv(), outputs)
    _write_manifest(os.path.join(args.out, "manifest.json"), "assess", argv, outputs)
    best = table.best_overall
    print(f"best candidate index: {best}")
    return 0


def _cmd_pipeline(args, argv):
    subjects = _load_subjects(args.subjects)
    attrs = _load_attrs(args.attrs, subjects.n)
    model = None
    if args.model != "select":
        model = _load_model(args.model, args.tau)
    cfg = PipelineConfig(
        s=args.s,
        tau=args.tau,
        model=model,
        m=args.m,
        seed=args.seed,
        constrained=not args.unconstrained_only,
        estimator=_estimator_config(args),
        candidate_burn_in=args.cand_burn_in,
        candidate_thin=args.cand_thin,
        gof_nsim=args.gof_nsim,
        jobs=args.jobs,
    )
    result = run_pipeline(subjects, cfg, attrs)
    out = args.out
    outputs = []
    _write(os.path.join(out, "model.json"), result.model.to_json() + "\n", outputs)
    _write(
        os.path.join(out, "theta_table.csv"),
        theta_table_csv(subjects.ids(), result.fits, result.theta_mean, result.theta_median),
        outputs,
    )
    for sid, fit in zip(subjects.ids(), result.fits):
        _write(os.path.join(out, "fits", f"{sid}.json"), fit.to_json() + "\n", outputs)
    cand_dir = os.path.join(out, "candidates")
    os.makedirs(cand_dir, exist_ok=True)
    cand_rows = []
    for cand in result.candidates:
        tag = "constrained" if cand.constrained else "unconstrained"
        name = f"{tag}_{cand.source}_{cand.index:02d}.edges"
        if cand.graph is not None:
            save_graph(cand.graph, os.path.join(cand_dir, name))
            outputs.append(os.path.join(cand_dir, name))
        cand_rows.append({
            "file": name if cand.graph is not None else None,
            "index": cand.index, "source": cand.source,
            "constrained": cand.constrained, "seed": cand.seed,
            "error": cand.error,
        })
    _write(os.path.join(cand_dir, "candidates.json"),
           json.dumps({"candidates": cand_rows}, indent=2, sort_keys=True) + "\n", outputs)
    _write(os.path.join(out, "assessment.csv"), result.table.to_csv(), outputs)
    if result.representative is not None:
        rep_path = os.path.join(out, "representative.edges")
        save_graph(result.representative, rep_path)
        outputs.append(rep_path)
    # degree distributions for every network (plot data)
    deg_lines = ["network,degree,count"]
    networks = [(f"subject_{s.id}", s.graph) for s in subjects]
    networks += [(f"edge_based_{fam}", g) for fam, g in sorted(result.edge_based.items())]
    networks += [
        (f"{'constrained' if c.constrained else 'unconstrained'}_{c.source}_{c.index}", c.graph)
        for c in result.candidates if c.graph is not None
    ]
    for name, g in networks:
        counts = np.bincount(g.adjacency_matrix().sum(axis=1), minlength=g.n)
        for d, cnt in enumerate(counts):
            deg_lines.append(f"{name},{d},{int(cnt)}")
    _write(os.path.join(out, "degree_distributions.csv"),
           "\n".join(deg_lines) + "\n", outputs)
    # nodal CDFs for the representative, the references, and every subject
    nodal_parts = []
    for name, g in networks:
        nodal_parts.append(nodal_cdf_csv(name, nodal_distributions(g)))
    merged = nodal_parts[0] + "".join(
        "\n".join(part.splitlines()[1:]) + "\n" for part in nodal_parts[1:]
    )
    _write(os.path.join(out, "nodal_cdf.csv"), merged, outputs)
    profiles = [(f"subject_{sid}", prof) for sid, prof in sorted(result.subject_profiles.items())]
    _write(os.path.join(out, "subject_profiles.csv"), profile_table_csv(profiles), outputs)
    for sid, report in sorted(result.gof_reports.items()):
        _write(os.path.join(out, "gof", f"{sid}.csv"), report.to_csv(), outputs)
    _write_manifest(os.path.join(out, "manifest.json"), "pipeline", argv, outputs)
    best = result.representative_index
    print(f"representative candidate index: {best} "
          f"(subject reference: {result.reference_subject})")
    return 0


def _add_estimator_flags(sp):
    sp.add_argument("--sample-size", type=int, default=None, dest="sample_size")
    sp.add_argument("--refine-size", type=int, default=None, dest="refine_size")
    sp.add_argument("--max-iter", type=int, default=None, dest="max_iter")
    sp.add_argument("--est-burn-in", type=int, default=None, dest="est_burn_in")
    sp.add_argument("--est-thin", type=int, default=None, dest="est_thin")
    sp.add_argument("--refine-rounds", type=int, default=None, dest="refine_rounds")
    sp.add_argument("--t-threshold", type=float, default=None, dest="t_threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brainrep",
        description="Group-representative connectivity networks via ERGMs",
    )
    parser.add_argument("--manifest", help="replay a previous run from its manifest")
    sub = parser.add_subparsers(dest="command")

    sp = sub.add_parser("threshold", help="correlation matrix -> edge list")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--s", type=float, default=2.8)
    sp.add_argument("--mode", choices=("density", "value"), default="density")
    sp.add_argument("--cutoff", type=float, default=0.0)
    sp.set_defaults(func=_cmd_threshold)

    sp = sub.add_parser("metrics", help="metric profile of one network")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", default=None)
    sp.add_argument("--nodal", action="store_true")
    sp.add_argument("--name", default="network")
    sp.set_defaults(func=_cmd_metrics)

    sp = sub.add_parser("fit", help="estimate coefficients for one network")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--model", default="default")
    sp.add_argument("--tau", type=float, default=0.75)
    sp.add_argument("--method", choices=("mple", "mcmc", "exact"), default="mcmc")
    sp.add_argument("--attrs", default=None)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--exact-limit", type=int, default=6, dest="exact_limit")
    _add_estimator_flags(sp)
    sp.set_defaults(func=_cmd_fit)

    sp = sub.add_parser("select-model", help="stepwise term selection")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--attrs", default=None)
    sp.add_argument("--tau", type=float, default=0.75)
    sp.add_argument("--nsim", type=int, default=100)
    sp.add_argument("--seed", type=int, required=True)
    _add_estimator_flags(sp)
    sp.set_defaults(func=_cmd_select_model)

    sp = sub.add_parser("simulate", help="sample networks at fixed coefficients")
    sp.add_argument("--model", default="default")
    sp.add_argument("--tau", type=float, default=0.75)
    sp.add_argument("--theta", default=None)
    sp.add_argument("--fit", default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--constraint", default=None,
                    help="edge list whose degree sequence constrains samples")
    sp.add_argument("--count", type=int, default=5)
    sp.add_argument("--burn-in", type=int, default=50_000, dest="burn_in")
    sp.add_argument("--thin", type=int, default=10_000)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--source", choices=("mean", "median"), default="mean")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("gof", help="goodness-of-fit diagnostics")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--model", default="default")
    sp.add_argument("--tau", type=float, default=0.75)
    sp.add_argument("--theta", default=None)
    sp.add_argument("--fit", default=None)
    sp.add_argument("--attrs", default=None)
    sp.add_argument("--nsim", type=int, default=100)
    sp.add_argument("--include-nsp", action="store_true", dest="include_nsp")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_gof)

    sp = sub.add_parser("assess", help="distance table for candidate networks")
    sp.add_argument("--subjects", required=True)
    sp.add_argument("--candidates", required=True)
    sp.add_argument("--edge-based-mean", default=None, dest="edge_based_mean")
    sp.add_argument("--edge-based-median", default=None, dest="edge_based_median")
    sp.add_argument("--s", type=float, default=2.8)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_assess)

    sp = sub.add_parser("pipeline", help="full group pipeline")
    sp.add_argument("--subjects", required=True)
    sp.add_argument("--attrs", default=None)
    sp.add_argument("--out", required=True)
    sp.add_argument("--model", default="default",
                    help="'default', 'select', or a model JSON file")
    sp.add_argument("--s", type=float, default=2.8)
    sp.add_argument("--tau", type=float, default=0.75)
    sp.add_argument("--m", type=int, default=5)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--unconstrained-only", action="store_true",
                    dest="unconstrained_only")
    sp.add_argument("--cand-burn-in", type=int, default=50_000, dest="cand_burn_in")
    sp.add_argument("--cand-thin", type=int, default=10_000, dest="cand_thin")
    sp.add_argument("--gof-nsim", type=int, default=100, dest="gof_nsim")
    sp.add_argument("--jobs", type=int, default=1)
    _add_estimator_flags(sp)
    sp.set_defaults(func=_cmd_pipeline)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.manifest:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return main(doc["argv"])
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args, argv)
    except BrainrepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
