"""Command-line front end for the toric-code decoding laboratory.

Each subcommand maps onto one study: exhaustive enumeration, closed-form
path counting, direct Monte Carlo, threshold fitting, rare-event
splitting, cycle counting, the entropic failure model, and a built-in
verification battery.  Every run writes an RFC-4180 CSV data file plus a
JSON sidecar carrying the full configuration, seed, and runtime, so that
any output can be traced back to an equivalent invocation.  Data files
are byte-identical across reruns with the same configuration and seed.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import enumeration, geometry, model, montecarlo, pathcount, splitting, walks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _write_csv(path: str, header: list[str], rows: list[list]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_sidecar(path: str, config: dict, started: float, extra=None):
    sidecar = {
        "config": config,
        "runtime_seconds": round(time.time() - started, 3),
    }
    if extra:
        sidecar.update(extra)
    with open(path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def load_config(csv_path: str) -> dict:
    """Read back the configuration recorded beside a data file."""
    with open(csv_path + ".json") as fh:
        return json.load(fh)["config"]


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _cmd_enumerate(args) -> dict:
    geom = geometry.build_geometry(args.orientation, args.d)
    w = args.weight if args.weight is not None else args.d // 2
    rows = []
    for policy in args.policies:
        tally = enumeration.enumerate_failures(geom, w, policy=policy)
        rows.append([args.orientation, args.d, w, policy,
                     tally.horizontal_or_vertical(w), tally.diagonal(w),
                     tally.failures(w)])
    report = enumeration.coset_report(geom, w)
    expectation = enumeration.random_decoder_expectation(report)
    rows.append([args.orientation, args.d, w, "random", "", "",
                 _fmt(expectation)])
    _write_csv(args.output, ["orientation", "d", "weight", "policy",
                             "horizontal_vertical", "diagonal", "total"], rows)
    return {"n_syndromes": report.n_syndromes, "n_configs": report.n_configs}


def _cmd_pathcount(args) -> dict:
    rows = []
    for d in args.d_list:
        rows.append([d,
                     pathcount.square_min_weight(d),
                     pathcount.rotated_lower_bound(d),
                     pathcount.rotated_upper_bound(d),
                     _fmt(pathcount.growth_rate(pathcount.square_min_weight, d)),
                     _fmt(pathcount.growth_rate(pathcount.rotated_upper_bound, d))])
    _write_csv(args.output,
               ["d", "square_exact", "rotated_lower", "rotated_upper",
                "growth_square", "growth_rotated_upper"], rows)
    return {"gamma_square": pathcount.gamma_asymptotics("square"),
            "gamma_rotated": pathcount.gamma_asymptotics("rotated")}


def _estimate_grid(orientation, d_list, p_grid, eta, seed):
    estimates = []
    for d in d_list:
        geom = geometry.build_geometry(orientation, d)
        for p in p_grid:
            run_seed = seed + d * 1000003 + int(round(p * 10**6))
            estimates.append(montecarlo.estimate_failure_rate(
                geom, float(p), eta, seed=run_seed))
    return estimates


def _estimate_rows(estimates):
    return [[e.orientation, e.d, e.n, _fmt(e.p), e.eta, e.failures,
             _fmt(e.p_hat), _fmt(e.sigma)] for e in estimates]


_ESTIMATE_HEADER = ["orientation", "d", "n", "p", "eta", "failures", "P", "sigma"]


def _cmd_mc(args) -> dict:
    p_grid = args.p if args.p else np.linspace(args.p_min, args.p_max,
                                               args.p_points)
    estimates = _estimate_grid(args.orientation, args.d_list, p_grid,
                               args.eta, args.seed)
    _write_csv(args.output, _ESTIMATE_HEADER, _estimate_rows(estimates))
    return {"points": len(estimates)}


def _cmd_threshold(args) -> dict:
    p_grid = np.linspace(args.p_min, args.p_max, args.p_points)
    summary = {}
    rows = []
    for orientation in args.orientations:
        estimates = _estimate_grid(orientation, args.d_list, p_grid,
                                   args.eta, args.seed)
        rows.extend(_estimate_rows(estimates))
        fit = montecarlo.fit_threshold(estimates)
        summary[orientation] = {
            "p_th": fit.p_th, "mu": fit.mu, "a": fit.a, "b": fit.b,
            "c": fit.c, "errors": fit.errors, "residual": fit.residual,
            "n_points": fit.n_points,
        }
    _write_csv(args.output, _ESTIMATE_HEADER, rows)
    return {"fits": summary}


def _cmd_split(args) -> dict:
    geom = geometry.build_geometry(args.orientation, args.d)
    rates = splitting.geometric_schedule(args.p0, args.p_anchor,
                                         ratio=args.ratio)
    anchor = montecarlo.estimate_failure_rate(geom, rates[0],
                                              args.anchor_eta,
                                              seed=args.seed)
    schedule = splitting.SplitSchedule(rates=tuple(rates),
                                       anchor_p_hat=anchor.p_hat,
                                       anchor_sigma=anchor.sigma)
    result = splitting.split_failure_rate(geom, schedule, steps=args.steps,
                                          seed=args.seed + 1)
    rows = []
    for j, est in enumerate(result.ratios):
        rows.append([j, _fmt(est.p_high), _fmt(est.p_low), _fmt(est.c_star),
                     _fmt(est.ratio), _fmt(est.sigma),
                     est.diagnostics["low"]["accepted_failing"],
                     est.diagnostics["low"]["proposed"]])
    _write_csv(args.output,
               ["step", "p_high", "p_low", "C_star", "R", "sigma",
                "accepted_failing", "proposed"], rows)
    return {"p0": result.p0, "P": result.p_hat, "sigma": result.sigma,
            "anchor": {"p": rates[0], "P": anchor.p_hat,
                       "sigma": anchor.sigma},
            "rate_estimates": [
                {"p": p, "P": v, "sigma": s}
                for p, v, s in result.rate_estimates()]}


def _cmd_walks(args) -> dict:
    curves = {}
    rows = []
    for d in args.d_list:
        geom = geometry.build_geometry(args.orientation, d)
        l_max = int(args.l_max_factor * math.sqrt(geom.n / 2.0))
        points = []
        for l in range(d, l_max + 1, 2):
            pt = walks.sample_constrained(geom, l, args.samples,
                                          seed=args.seed + d * 1009 + l)
            points.append(pt)
            sqrt_half_n = math.sqrt(geom.n / 2.0)
            rows.append([d, geom.n, l, _fmt(l / sqrt_half_n),
                         _fmt(pt.log_ncon), _fmt(pt.sigma_log),
                         pt.accepted, pt.samples])
        curves[d] = points
    _write_csv(args.output,
               ["d", "n", "l", "l_hat", "log_ncon", "sigma_log",
                "accepted", "samples"], rows)
    extra = {}
    if len(curves) >= 4:
        fit = walks.extrapolate_ncon(curves)
        extra["extrapolation"] = [
            {"l_hat": float(lh), "A": float(a), "B": float(b), "C": float(c)}
            for lh, a, b, c, bad in zip(fit.l_hat, fit.A, fit.B, fit.C,
                                        fit.degenerate)
            if not bad]
    return extra


def _cmd_model(args) -> dict:
    if args.op == "threshold-bound":
        value = model.threshold_lower_bound(args.c)
        print(f"{value:.4f}")
        _write_csv(args.output, ["c", "p_bound"], [[_fmt(args.c), _fmt(value)]])
        return {"p_bound": value}
    if args.op == "critical-p":
        value = model.critical_p(args.xi_th, args.c)
        print(f"{value:.4f}")
        _write_csv(args.output, ["xi_th", "c", "p_c"],
                   [[_fmt(args.xi_th), _fmt(args.c), _fmt(value)]])
        return {"p_c": value}
    # args.op == "xi": invert the model on previously generated data files.
    ncon = {}
    with open(args.ncon_csv, newline="") as fh:
        for row in csv.DictReader(fh):
            if int(row["d"]) == args.d:
                ncon[int(row["l"])] = math.exp(float(row["log_ncon"]))
    estimates = []
    with open(args.estimates_csv, newline="") as fh:
        for row in csv.DictReader(fh):
            if int(row["d"]) != args.d or row["orientation"] != args.orientation:
                continue
            estimates.append(montecarlo.FailureEstimate(
                orientation=row["orientation"], d=int(row["d"]),
                n=int(row["n"]), p=float(row["p"]), eta=int(row["eta"]),
                failures=int(row["failures"]), seed=0))
    curve = model.fit_xi(estimates, ncon, complete=args.complete_ncon,
                         filling=args.filling)
    _write_csv(args.output, ["p", "xi", "sigma", "flagged"],
               [[_fmt(r["p"]), _fmt(r["xi"]), _fmt(r["sigma"]), r["flagged"]]
                for r in curve.rows()])
    return {"points": len(curve.p)}


def _cmd_verify(args) -> dict:
    """Fast oracle battery covering each module's key invariants."""
    checks = []

    def check(name, ok):
        checks.append((name, bool(ok)))
        print(f"{'ok' if ok else 'FAIL'}  {name}")

    g4 = geometry.build_geometry("rotated", 4)
    tally = enumeration.enumerate_failures(g4, 2, policy="best")
    check("enumeration rotated d=4 minimal failures",
          tally.horizontal_or_vertical(2) == 48 and tally.diagonal(2) == 8)
    check("square closed-form counts",
          [pathcount.square_min_weight(d) for d in (4, 6, 8)] == [24, 120, 560])
    check("rotated bounds bracket d=4 total",
          pathcount.rotated_lower_bound(4) <= 56 <= pathcount.rotated_upper_bound(4))
    est = montecarlo.estimate_failure_rate(g4, 0.05, 20000, seed=11)
    check("monte carlo estimate in range", 0.0 < est.p_hat < 0.2)
    x = np.exp(np.linspace(-5, 5, 101))
    check("acceptance-ratio kernel identity",
          np.allclose(splitting.g_bennett(x),
                      splitting.g_bennett(1 / x) / x))
    check("unconstrained walk anchors",
          walks.count_unconstrained(4, 2, 0).exact == 16
          and walks.count_unconstrained(6, 6, 0).exact == 1)
    check("constrained cycles at l=d",
          walks.exact_constrained_small(g4, 4).exact == 28)
    check("threshold lower bound",
          abs(model.threshold_lower_bound(2.638) - 0.0373) < 1e-4)
    check("model critical rate",
          abs(model.critical_p(1.2471, 2.638) - 0.103) < 1e-3)
    failed = [name for name, ok in checks if not ok]
    if failed:
        raise RuntimeError(f"verification failed: {failed}")
    return {"checks": len(checks), "failed": 0}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toriclab",
        description="Decoding and statistics laboratory for the toric code")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output_default):
        p.add_argument("--output", default=output_default,
                       help="CSV output path (JSON sidecar written beside it)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1,
                       help="accepted for compatibility; results are "
                            "worker-count independent")

    p = sub.add_parser("enumerate", help="exhaustive minimal-failure counts")
    p.add_argument("--orientation", choices=["square", "rotated"],
                   required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--weight", type=int, default=None)
    p.add_argument("--policies", nargs="+",
                   default=["best", "worst", "implemented"],
                   choices=["best", "worst", "implemented"])
    common(p, "enumerate.csv")
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("pathcount", help="closed-form counts and bounds")
    p.add_argument("--d-list", type=int, nargs="+", default=[4, 6, 8, 10, 12])
    common(p, "pathcount.csv")
    p.set_defaults(func=_cmd_pathcount)

    p = sub.add_parser("mc", help="direct Monte Carlo failure rates")
    p.add_argument("--orientation", choices=["square", "rotated"],
                   required=True)
    p.add_argument("--d-list", type=int, nargs="+", required=True)
    p.add_argument("--p", type=float, nargs="*", default=None)
    p.add_argument("--p-min", type=float, default=0.05)
    p.add_argument("--p-max", type=float, default=0.11)
    p.add_argument("--p-points", type=int, default=7)
    p.add_argument("--eta", type=int, default=100_000)
    common(p, "mc.csv")
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("threshold", help="threshold fit over a size ladder")
    p.add_argument("--orientations", nargs="+",
                   default=["square", "rotated"],
                   choices=["square", "rotated"])
    p.add_argument("--d-list", type=int, nargs="+",
                   default=[8, 10, 12, 14, 16])
    p.add_argument("--p-min", type=float, default=0.095)
    p.add_argument("--p-max", type=float, default=0.105)
    p.add_argument("--p-points", type=int, default=11)
    p.add_argument("--eta", type=int, default=100_000)
    common(p, "threshold.csv")
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("split", help="rare-event splitting estimate")
    p.add_argument("--orientation", choices=["square", "rotated"],
                   required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--p-anchor", type=float, default=0.05)
    p.add_argument("--ratio", type=float, default=1.7)
    p.add_argument("--anchor-eta", type=int, default=200_000)
    p.add_argument("--steps", type=int, default=1_000_000)
    common(p, "split.csv")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("walks", help="sampled non-contractible cycle counts")
    p.add_argument("--orientation", choices=["square", "rotated"],
                   required=True)
    p.add_argument("--d-list", type=int, nargs="+", default=[4, 6, 8, 10])
    p.add_argument("--l-max-factor", type=float, default=3.0)
    p.add_argument("--samples", type=int, default=100_000)
    common(p, "walks.csv")
    p.set_defaults(func=_cmd_walks)

    p = sub.add_parser("model", help="entropic failure model quantities")
    p.add_argument("--op", choices=["threshold-bound", "critical-p", "xi"],
                   required=True)
    p.add_argument("--c", type=float, default=model.SAW_CONSTANT)
    p.add_argument("--xi-th", type=float, default=model.XI_THRESHOLD)
    p.add_argument("--orientation", choices=["square", "rotated"])
    p.add_argument("--d", type=int)
    p.add_argument("--estimates-csv", help="output of the mc subcommand")
    p.add_argument("--ncon-csv", help="output of the walks subcommand")
    p.add_argument("--filling", choices=["uniform", "binomial"],
                   default="uniform",
                   help="per-cycle multiplicity scheme used when fitting xi")
    p.add_argument("--complete-ncon", action="store_true",
                   help="treat the cycle-count table as covering every "
                        "nonzero length, disabling the truncation guard")
    common(p, "model.csv")
    p.set_defaults(func=_cmd_model)

    p = sub.add_parser("verify", help="fast oracle and invariant battery")
    common(p, "verify.csv")
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "model" and args.op == "xi":
        missing = [name for name in ("d", "orientation", "estimates_csv",
                                     "ncon_csv")
                   if getattr(args, name) is None]
        if missing:
            parser.error(f"model --op xi requires {missing}")
    config = {k: v for k, v in vars(args).items() if k != "func"}
    started = time.time()
    try:
        extra = args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_NUMERICAL
    if args.command == "verify":
        _write_csv(args.output, ["checks", "failed"],
                   [[extra["checks"], extra["failed"]]])
    _write_sidecar(args.output, config, started, extra)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
