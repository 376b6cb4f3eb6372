"""Batch command-line front end: simulate, fit, summarize, compare, ppc,
diagnose.

Every subcommand is reproducible from its manifest: the seed and
configuration fully determine the statistical outputs.  Exit codes: 0
success, 2 usage, 3 validation, 4 sampling failure, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time

import numpy as np

from . import __version__, data, diagnostics, kernels
from .criteria import dic, lpml, waic
from .data import (DataError, EncodingPlan, TrueParams, atomic_write_text,
                   sha256_file)
from .model import ModelSpec, PosteriorModel, pointwise_loglik
from .ppc import nearest_rank_percentile, ppc_report
from .sampler import SamplerConfig, SamplingError, run_chains

_LEVEL_ALIASES = {"fixed": "fixed", "two": "two_level",
                  "two_level": "two_level", "three": "three_level",
                  "three_level": "three_level"}

_HEADLINE = re.compile(r"^(alpha_m|beta_m|phi_ustar$|phi_v$|lp$)")


def _fmt(value) -> str:
    return repr(float(value))


def _summary_stats(flat: np.ndarray):
    ordered = np.sort(flat)
    return (float(np.mean(flat)),
            float(np.std(flat, ddof=1)) if flat.size > 1 else 0.0,
            nearest_rank_percentile(ordered, 0.025),
            nearest_rank_percentile(ordered, 0.975))


def _label_for(name: str, covariates, outcome_levels) -> str:
    m = re.fullmatch(r"(alpha_[mc])\[(\d+)\]", name)
    if m:
        a = int(m.group(2))
        tag = " (conditional)" if m.group(1) == "alpha_c" else ""
        if outcome_levels and a < len(outcome_levels):
            return f"threshold <= {outcome_levels[a - 1]}{tag}"
        return f"threshold {a}{tag}"
    m = re.fullmatch(r"(beta_[mc])\[(\d+)\]", name)
    if m:
        k = int(m.group(2))
        tag = " (conditional)" if m.group(1) == "beta_c" else ""
        if covariates and k <= len(covariates):
            return covariates[k - 1] + tag
        return f"coefficient {k}{tag}"
    return {"phi_ustar": "region-effect concentration",
            "phi_v": "family-effect concentration",
            "lp": "log posterior"}.get(name, name)


def _write_summary(store, path, covariates=None, outcome_levels=None,
                   conditional=False):
    rows = ["name,label,mean,sd,q2.5,q97.5"]
    wanted = [n for n in store.names if _HEADLINE.match(n)]
    if conditional:
        wanted += [n for n in store.names
                   if n.startswith(("alpha_c[", "beta_c["))]
    for name in wanted:
        mean, sd, lo, hi = _summary_stats(store.get(name).reshape(-1))
        label = _label_for(name, covariates, outcome_levels)
        rows.append(f"{name},{label},{_fmt(mean)},{_fmt(sd)},{_fmt(lo)},"
                    f"{_fmt(hi)}")
    atomic_write_text(path, "\n".join(rows) + "\n")


def _write_diagnostics(store, path):
    rows = ["name,rhat,ess"]
    for name in store.names:
        draws = store.get(name)
        rows.append(f"{name},{_fmt(diagnostics.rhat(draws))},"
                    f"{_fmt(diagnostics.ess(draws))}")
    atomic_write_text(path, "\n".join(rows) + "\n")


def _write_effects(store, prefix, labels, path):
    entries = []
    for j, label in enumerate(labels):
        name = f"{prefix}[{j + 1}]"
        flat = store.get(name).reshape(-1)
        ordered = np.sort(flat)
        entries.append((float(np.mean(flat)), name, label,
                        nearest_rank_percentile(ordered, 0.025),
                        nearest_rank_percentile(ordered, 0.975)))
    entries.sort(key=lambda e: e[0])
    rows = ["name,label,mean,q2.5,q97.5"]
    rows += [f"{name},{label},{_fmt(mean)},{_fmt(lo)},{_fmt(hi)}"
             for mean, name, label, lo, hi in entries]
    atomic_write_text(path, "\n".join(rows) + "\n")


def _write_manifest(path, entries):
    atomic_write_text(path, "".join(f"{k} = {v}\n" for k, v in entries))


def _read_manifest(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if " = " in line:
                key, value = line.split(" = ", 1)
                out[key.strip()] = value.strip()
    return out


# ---------------------------------------------------------------------------
# subcommands

def _cmd_simulate(args) -> int:
    alpha = [float(v) for v in args.alpha.split(",")]
    beta = [float(v) for v in args.beta.split(",")] if args.beta else []
    sizes = tuple(int(v) for v in args.sizes.split(","))
    truth = TrueParams(alpha_c=np.array(alpha), beta_c=np.array(beta),
                       phi_ustar=args.phi_ustar, phi_v=args.phi_v,
                       n_regions=args.regions,
                       families_per_region=args.families,
                       family_sizes=sizes)
    rng = np.random.default_rng(args.seed)
    dataset, u, v = data.generate(truth, rng)
    os.makedirs(args.out, exist_ok=True)
    data.write_dataset_csv(dataset, os.path.join(args.out, "dataset.csv"))
    data.write_numeric_encoding(dataset,
                                os.path.join(args.out, "encoding.txt"))
    manifest = {
        "level": truth.level, "seed": args.seed,
        "alpha_c": alpha, "beta_c": beta,
        "phi_ustar": truth.phi_ustar, "phi_v": truth.phi_v,
        "n_regions": truth.n_regions,
        "families_per_region": truth.families_per_region,
        "family_sizes": list(sizes),
        "u": [float(x) for x in u], "v": [float(x) for x in v],
    }
    atomic_write_text(os.path.join(args.out, "truth.json"),
                      json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    print(f"wrote dataset with {dataset.n_obs} observations, "
          f"{dataset.n_regions} regions, {dataset.n_families} families "
          f"to {args.out}")
    return 0


def _load_inputs(args):
    plan = EncodingPlan.from_file(args.encoding)
    dataset = data.load(args.dataset, plan)
    return plan, dataset


def _cmd_fit(args) -> int:
    plan, dataset = _load_inputs(args)
    level = _LEVEL_ALIASES[args.model]
    spec = ModelSpec(dataset.n_categories, dataset.n_covariates, level)
    model = PosteriorModel(dataset, spec)
    config = SamplerConfig(
        n_chains=args.chains, n_iterations=args.iters, n_warmup=args.warmup,
        target_accept=args.target_accept, max_tree_depth=args.max_depth,
        seed=args.seed)
    started = time.perf_counter()
    store = run_chains(model, config)
    elapsed = time.perf_counter() - started

    os.makedirs(args.out, exist_ok=True)
    out = lambda name: os.path.join(args.out, name)
    data.save_draws(store, out("draws.csv"))
    _write_summary(store, out("summary.csv"), dataset.covariate_names,
                   dataset.outcome_labels, conditional=args.conditional_scale)
    _write_diagnostics(store, out("diagnostics.csv"))
    if spec.has_u:
        _write_effects(store, "u", dataset.region_labels, out("effects_u.csv"))
    if spec.has_v:
        _write_effects(store, "v", dataset.family_labels,
                       out("effects_v.csv"))
    atomic_write_text(out("load_report.txt"),
                      data.frequency_report(dataset, plan))
    saturated = int(np.sum(store.tree_depth >= config.max_tree_depth))
    _write_manifest(out("manifest.txt"), [
        ("tool", f"ordbridge {__version__}"), ("command", "fit"),
        ("model", level), ("dataset", args.dataset),
        ("dataset_sha256", sha256_file(args.dataset)),
        ("encoding_sha256", sha256_file(args.encoding)),
        ("seed", args.seed), ("chains", config.n_chains),
        ("iterations", config.n_iterations), ("warmup", config.n_warmup),
        ("target_accept", config.target_accept),
        ("max_tree_depth", config.max_tree_depth),
        ("kernel_backend", kernels.BACKEND),
        ("n_obs", dataset.n_obs), ("n_regions", dataset.n_regions),
        ("n_families", dataset.n_families),
        ("divergent_post_warmup", int(store.divergent.sum())),
        ("max_tree_depth_hits", saturated),
        ("timing_seconds", f"{elapsed:.3f}"),
    ])
    print(f"fit complete: {store.n_total} retained draws -> {args.out}")
    return 0


def _cmd_summarize(args) -> int:
    store = data.load_draws(args.draws)
    if store.n_total == 0:
        raise DataError("no retained draws in store")
    covariates = outcome_levels = None
    if args.encoding:
        plan = EncodingPlan.from_file(args.encoding)
        covariates = plan.design_labels()
        outcome_levels = list(plan.outcome_levels)
    _write_summary(store, args.out, covariates, outcome_levels,
                   conditional=args.conditional_scale)
    print(f"wrote {args.out}")
    return 0


def _infer_level(names) -> str:
    if "phi_ustar" in names:
        return "three_level"
    if "phi_v" in names:
        return "two_level"
    return "fixed"


def _cmd_compare(args) -> int:
    plan, dataset = _load_inputs(args)
    dataset_hash = sha256_file(args.dataset)
    os.makedirs(args.out, exist_ok=True)
    results = []
    for draws_path in args.draws:
        manifest_path = os.path.join(os.path.dirname(draws_path) or ".",
                                     "manifest.txt")
        if os.path.exists(manifest_path):
            recorded = _read_manifest(manifest_path).get("dataset_sha256")
            if recorded and recorded != dataset_hash:
                raise DataError(
                    f"{draws_path}: fitted against a different dataset "
                    f"(fit hash {recorded}, given {dataset_hash})")
        store = data.load_draws(draws_path)
        level = _infer_level(store.names)
        spec = ModelSpec(dataset.n_categories, dataset.n_covariates, level)
        pll = pointwise_loglik(store, dataset, spec)
        waic_val, lppd, rho = waic(pll)
        lpml_val, cpo = lpml(pll)
        dic_val, dbar, dhat = dic(pll)
        label = os.path.basename(os.path.dirname(draws_path) or ".") or level
        cpo_file = os.path.join(args.out, f"cpo_{label}.csv")
        atomic_write_text(cpo_file, "observation,cpo\n" + "".join(
            f"{n + 1},{_fmt(c)}\n" for n, c in enumerate(cpo)))
        results.append({"label": label, "level": level, "lpml": lpml_val,
                        "waic": waic_val, "dic": dic_val, "lppd": lppd,
                        "rho": rho, "dbar": dbar, "dhat": dhat,
                        "cpo_file": os.path.basename(cpo_file)})
    best_lpml = max(r["lpml"] for r in results)
    best_waic = min(r["waic"] for r in results)
    best_dic = min(r["dic"] for r in results)
    rows = ["model,level,lpml,waic,dic,lppd,rho,dbar,dhat,"
            "best_lpml,best_waic,best_dic,cpo_file"]
    for r in results:
        rows.append(
            f"{r['label']},{r['level']},{_fmt(r['lpml'])},{_fmt(r['waic'])},"
            f"{_fmt(r['dic'])},{_fmt(r['lppd'])},{_fmt(r['rho'])},"
            f"{_fmt(r['dbar'])},{_fmt(r['dhat'])},"
            f"{int(r['lpml'] == best_lpml)},{int(r['waic'] == best_waic)},"
            f"{int(r['dic'] == best_dic)},{r['cpo_file']}")
    table_path = os.path.join(args.out, "criteria.csv")
    atomic_write_text(table_path, "\n".join(rows) + "\n")
    print(f"wrote {table_path}")
    return 0


def _cmd_ppc(args) -> int:
    plan, dataset = _load_inputs(args)
    store = data.load_draws(args.draws)
    level = _infer_level(store.names)
    spec = ModelSpec(dataset.n_categories, dataset.n_covariates, level)
    result = ppc_report(store, dataset, spec, seed=args.seed)
    atomic_write_text(args.out, result.format_table())
    print(f"wrote {args.out}")
    return 0


def _cmd_diagnose(args) -> int:
    store = data.load_draws(args.draws)
    if store.n_total == 0:
        raise DataError("no retained draws in store")
    os.makedirs(args.out, exist_ok=True)
    _write_diagnostics(store, os.path.join(args.out, "diagnostics.csv"))
    headline = [n for n in store.names if _HEADLINE.match(n)]
    for name in headline:
        safe = re.sub(r"[^A-Za-z0-9_]+", "_", name).strip("_")
        draws = store.get(name)
        rows = ["chain,iter,value"]
        rows += [f"{c},{r},{_fmt(draws[c, r])}"
                 for c in range(store.n_chains)
                 for r in range(store.n_retained)]
        atomic_write_text(os.path.join(args.out, f"trace_{safe}.csv"),
                          "\n".join(rows) + "\n")
        edges = np.histogram_bin_edges(draws.reshape(-1), bins=40)
        rows = ["chain,bin_low,bin_high,count"]
        for c in range(store.n_chains):
            counts, _ = np.histogram(draws[c], bins=edges)
            rows += [f"{c},{_fmt(edges[b])},{_fmt(edges[b + 1])},{counts[b]}"
                     for b in range(len(counts))]
        atomic_write_text(os.path.join(args.out, f"density_{safe}.csv"),
                          "\n".join(rows) + "\n")
    rhats = {n: diagnostics.rhat(store.get(n)) for n in store.names}
    finite = {n: v for n, v in rhats.items() if np.isfinite(v)}
    worst = max(finite, key=finite.get) if finite else "none"
    saturated = int(np.sum(store.tree_depth
                           >= store.config.max_tree_depth))
    report = [
        f"retained draws = {store.n_total}",
        f"divergent transitions = {int(store.divergent.sum())}",
        f"max tree depth hits = {saturated}",
        f"worst rhat = {worst} "
        f"({finite[worst]!r})" if finite else "worst rhat = none",
        f"flagged (degenerate) quantities = "
        f"{sum(1 for v in rhats.values() if not np.isfinite(v))}",
    ]
    atomic_write_text(os.path.join(args.out, "report.txt"),
                      "\n".join(report) + "\n")
    print(f"wrote diagnostics to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ordbridge",
        description="Bayesian cumulative-logit models with Bridge-distributed "
                    "random effects")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--regions", type=int, default=15)
    p.add_argument("--families", type=int, default=40,
                   help="families per region")
    p.add_argument("--sizes", default="2,3,4",
                   help="comma list of family-size choices")
    p.add_argument("--alpha", default="-0.3,1.5",
                   help="comma list of true thresholds")
    p.add_argument("--beta", default="0.5,-0.8,1.2",
                   help="comma list of true coefficients (may be empty)")
    p.add_argument("--phi-ustar", type=float, default=None,
                   dest="phi_ustar")
    p.add_argument("--phi-v", type=float, default=None, dest="phi_v")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="sample the posterior of one model")
    p.add_argument("dataset")
    p.add_argument("--encoding", required=True)
    p.add_argument("--model", required=True, choices=sorted(_LEVEL_ALIASES))
    p.add_argument("--out", required=True)
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--warmup", type=int, default=1000)
    p.add_argument("--target-accept", type=float, default=0.8,
                   dest="target_accept")
    p.add_argument("--max-depth", type=int, default=10, dest="max_depth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--conditional-scale", action="store_true",
                   dest="conditional_scale",
                   help="include conditional-scale rows in the summary")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("summarize", help="summary table from a draws file")
    p.add_argument("--draws", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--encoding", default=None,
                   help="optional encoding sidecar for row labels")
    p.add_argument("--conditional-scale", action="store_true",
                   dest="conditional_scale")
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("compare", help="criteria table for fitted models")
    p.add_argument("dataset")
    p.add_argument("--encoding", required=True)
    p.add_argument("--draws", required=True, nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("ppc", help="posterior predictive difference table")
    p.add_argument("dataset")
    p.add_argument("--encoding", required=True)
    p.add_argument("--draws", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ppc)

    p = sub.add_parser("diagnose", help="convergence diagnostics and traces")
    p.add_argument("--draws", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_diagnose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SamplingError as exc:
        print(f"sampling error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
