"""Command-line surface: distance, deform, compare, selftest, bench.

Every command is a pure function of its input files, flags, and seed;
reports are line-oriented key=value pairs (floats printed with full
round-trip precision) plus an optional JSON sidecar. Exit codes: 0 on
success, 1 on validation errors, 2 when an exact-solver resource guard
trips, 3 when a selftest suite fails.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
import time
from contextlib import nullcontext

import numpy as np

from .cloudio import load_manifest, read_cloud, write_cloud, write_matrix_csv, write_trace_csv
from .compare import EXACT, cost_matrix, nearest_neighbor_rows, relative_error
from .errors import CloudFormatError, ResourceGuardError, ValidationError
from .exact_ot import joint_wasserstein
from .flow import FlowConfig, deform
from .geometry import EUCLIDEAN, LORENTZ, SPHERE
from .projections import BusemannLorentz, Circular, Linear, OddPolynomial
from .selftest import run_suites, sample_complexity_trend
from .sliced import EstimatorConfig, default_fixed_psi, estimate, standard_error

_MAX_G_FLAGS = 8
ESTIMATOR_FAMILIES = ("sw", "gsw", "h2sw", "chsw")
_DEFAULT_G = {EUCLIDEAN: "linear", SPHERE: "circular:1", LORENTZ: "busemann"}


def parse_defining_function(text: str):
    """linear | circular:<r> | poly:<m> | busemann"""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    try:
        if name == "linear":
            return Linear()
        if name == "circular":
            return Circular(float(arg) if arg else 1.0)
        if name == "poly":
            if not arg:
                raise ValidationError("poly needs a degree, e.g. poly:3")
            return OddPolynomial(int(arg))
        if name == "busemann":
            return BusemannLorentz()
    except ValueError as exc:
        raise ValidationError(f"bad defining function {text!r}: {exc}")
    raise ValidationError(
        f"unknown defining function {text!r}; expected linear, circular:<r>, poly:<m>, busemann"
    )


def _marginal_gs(args, specs):
    gs = []
    for k, spec in enumerate(specs):
        raw = getattr(args, f"g{k + 1}", None)
        if raw is None:
            raw = _DEFAULT_G[spec.kind]
        gs.append(parse_defining_function(raw))
    return tuple(gs)


def _estimator_config(family, args, specs):
    if family in ("h2sw", "chsw"):
        gs = _marginal_gs(args, specs)
    elif family == "gsw":
        gs = (parse_defining_function(args.g1 if args.g1 else "circular:1"),)
    else:  # sw
        gs = (Linear(),)
    fixed_psi = None
    if family == "chsw":
        if args.fixed_psi:
            fixed_psi = np.array([float(v) for v in args.fixed_psi.split(",")])
        else:
            fixed_psi = default_fixed_psi(len(specs))
    return EstimatorConfig(family, gs, L=args.L, p=args.p, seed=args.seed,
                           fixed_psi=fixed_psi)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return str(int(v))
    return str(v)


def _emit_report(report: dict, args) -> None:
    for k, v in report.items():
        print(f"{k}={_fmt(v)}")
    out = getattr(args, "out", None)
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "report.txt"), "w", encoding="utf-8") as fh:
            for k, v in report.items():
                fh.write(f"{k}={_fmt(v)}\n")
    if getattr(args, "json", False):
        path = os.path.join(out or ".", "report.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, default=str)
            fh.write("\n")


def _base_report(args, argv) -> dict:
    return {
        "command": shlex.join(argv) if argv else shlex.join(sys.argv[1:]),
        "seed": args.seed,
    }


def cmd_distance(args, argv) -> int:
    mu = read_cloud(args.mu)
    nu = read_cloud(args.nu)
    report = _base_report(args, argv)
    report.update({"mu": args.mu, "nu": args.nu, "L": args.L, "p": args.p})
    families = args.family or ["h2sw"]
    for family in families:
        t0 = time.perf_counter()
        if family == EXACT:
            pp, _ = joint_wasserstein(mu, nu, p=args.p)
            report["exact_pp"] = pp
            report["exact"] = pp ** (1.0 / args.p)
        else:
            cfg = _estimator_config(family, args, mu.specs)
            report[f"{family}_g"] = ",".join(repr(g) for g in cfg.gs)
            pp, per = estimate(mu, nu, cfg, return_per_direction=True)
            report[f"{family}_pp"] = pp
            report[family] = pp ** (1.0 / args.p)
            report[f"{family}_se"] = standard_error(per)
        report[f"time_{family}_s"] = round(time.perf_counter() - t0, 6)
    _emit_report(report, args)
    return 0


def cmd_deform(args, argv) -> int:
    source = read_cloud(args.source)
    target = read_cloud(args.target)
    family = (args.family or ["h2sw"])[0]
    if family == EXACT:
        raise ValidationError("deform needs a sliced family, not 'exact'")
    est = _estimator_config(family, args, source.specs)
    cfg = FlowConfig(est, step_size=args.step_size, steps=args.steps,
                     checkpoint_every=args.checkpoint_every,
                     reseed_per_step=not args.no_reseed)
    t0 = time.perf_counter()
    trace = deform(source, target, cfg)
    elapsed = time.perf_counter() - t0
    first, last = trace.checkpoints[0], trace.checkpoints[-1]
    report = _base_report(args, argv)
    report.update({
        "source": args.source, "target": args.target, "family": family,
        "steps": args.steps, "step_size": args.step_size, "L": args.L, "p": args.p,
        "initial_exact_w": first.exact_w, "final_exact_w": last.exact_w,
        "final_over_initial": last.exact_w / first.exact_w if first.exact_w > 0 else 0.0,
        "checkpoints": len(trace.checkpoints),
        "time_s": round(elapsed, 6),
    })
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    trace_path = os.path.join(out, "trace.csv")
    final_path = os.path.join(out, "final.cloud")
    write_trace_csv(trace_path, trace)
    write_cloud(final_path, trace.final_cloud)
    report["trace_file"] = trace_path
    report["final_cloud_file"] = final_path
    _emit_report(report, args)
    return 0


def cmd_compare(args, argv) -> int:
    collection = load_manifest(args.manifest)
    specs = collection.clouds[0].specs
    report = _base_report(args, argv)
    report.update({"manifest": args.manifest, "datasets": len(collection),
                   "L": args.L, "p": args.p})
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    C_ref = cost_matrix(collection, EXACT, exact_p=args.p)
    report["time_exact_s"] = round(time.perf_counter() - t0, 6)
    write_matrix_csv(os.path.join(out, "matrix_exact.csv"), collection.names, C_ref)
    report["relative_error_exact"] = relative_error(C_ref, C_ref)
    ref_nn = nearest_neighbor_rows(C_ref)
    for family in args.family or ["h2sw"]:
        if family == EXACT:
            continue
        cfg = _estimator_config(family, args, specs)
        t0 = time.perf_counter()
        C = cost_matrix(collection, cfg)
        report[f"time_{family}_s"] = round(time.perf_counter() - t0, 6)
        write_matrix_csv(os.path.join(out, f"matrix_{family}.csv"), collection.names, C)
        report[f"relative_error_{family}_sum"] = relative_error(C, C_ref)
        report[f"relative_error_{family}_mean"] = relative_error(C, C_ref, aggregate="mean")
        report[f"nn_match_{family}"] = int(np.sum(nearest_neighbor_rows(C) == ref_nn))
    _emit_report(report, args)
    return 0


def cmd_selftest(args, argv) -> int:
    results = run_suites(args.suite or None, seed=args.seed, n=args.n, trials=args.trials)
    report = _base_report(args, argv)
    ok = True
    for r in results:
        print(f"suite={r.name} passed={r.passed} failed={r.failed} detail={r.detail!r}")
        report[f"{r.name}_passed"] = r.passed
        report[f"{r.name}_failed"] = r.failed
        ok &= r.ok
    report["selftest"] = "PASS" if ok else "FAIL"
    print(f"selftest={report['selftest']}")
    if getattr(args, "out", None) or getattr(args, "json", False):
        _emit_report(report, args)
    return 0 if ok else 3


def cmd_bench(args, argv) -> int:
    res = sample_complexity_trend(seed=args.seed, L=args.L, resamples=args.resamples)
    report = _base_report(args, argv)
    report.update({"L": args.L, "resamples": args.resamples})
    for n, e in zip(res["n_list"], res["errors"]):
        report[f"err_n{n}"] = e
    report["decreasing_steps"] = res["decreasing_steps"]
    report["total_steps"] = res["total_steps"]
    trend_ok = res["decreasing_steps"] >= max(1, res["total_steps"] - 1)
    report["trend"] = "OK" if trend_ok else "WARN"
    _emit_report(report, args)
    if not trend_ok:
        print("warning: sample-complexity trend violated more than once", file=sys.stderr)
    return 0


def _add_common(p, seed_required=True, seed_default=None):
    p.add_argument("--seed", type=int, required=seed_required, default=seed_default,
                   help="RNG seed; required, no wall-clock fallback")
    p.add_argument("--threads", type=int, default=None,
                   help="cap internal (BLAS) parallelism; output is identical for any value")
    p.add_argument("--out", default=None, help="directory for report and result files")
    p.add_argument("--json", action="store_true", help="also write report.json")


def _add_estimator_flags(p):
    p.add_argument("--family", action="append",
                   choices=list(ESTIMATOR_FAMILIES) + [EXACT],
                   help="distance family; repeatable")
    p.add_argument("--L", type=int, default=100, help="number of projections")
    p.add_argument("--p", type=float, default=2.0, help="order of the distance")
    p.add_argument("--g1", default=None,
                   help="defining function for marginal 1 (linear|circular:<r>|poly:<m>|busemann); "
                        "for gsw, applied to the concatenated joint coordinates")
    p.add_argument("--g2", default=None, help="defining function for marginal 2")
    for k in range(3, _MAX_G_FLAGS + 1):
        p.add_argument(f"--g{k}", default=None, help=argparse.SUPPRESS)
    p.add_argument("--fixed-psi", dest="fixed_psi", default=None,
                   help="chsw mixing weights as comma-separated floats (default equal mix)")


def _build_parser():
    top = argparse.ArgumentParser(
        prog="h2sw",
        description="Sliced Wasserstein distances for heterogeneous joint distributions",
    )
    sub = top.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("distance", help="distances between two cloud files")
    p.add_argument("mu")
    p.add_argument("nu")
    _add_estimator_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("deform", help="gradient-flow deformation of one cloud toward another")
    p.add_argument("source")
    p.add_argument("target")
    _add_estimator_flags(p)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--step-size", dest="step_size", type=float, default=0.01)
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int, default=100)
    p.add_argument("--no-reseed", action="store_true",
                   help="keep one direction set for every step instead of reseeding")
    _add_common(p)
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("compare", help="pairwise cost matrices for a dataset manifest")
    p.add_argument("manifest")
    _add_estimator_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("selftest", help="randomized oracle-equivalence and property suites")
    p.add_argument("--suite", action="append", help="suite name; repeatable (default: all)")
    p.add_argument("--n", type=int, default=None, help="instance size override")
    p.add_argument("--trials", type=int, default=None, help="trial count override")
    _add_common(p, seed_required=False, seed_default=0)
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("bench", help="sample-complexity trend benchmark (soft-fail)")
    p.add_argument("--L", type=int, default=200)
    p.add_argument("--resamples", type=int, default=20)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is not None:
        try:
            from threadpoolctl import threadpool_limits

            limiter = threadpool_limits(limits=args.threads)
        except ImportError:
            limiter = nullcontext()
    else:
        limiter = nullcontext()
    try:
        with limiter:
            return args.func(args, argv)
    except CloudFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
