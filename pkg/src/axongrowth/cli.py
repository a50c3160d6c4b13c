"""Command line entry point: simulate, compare, sweep, dwell, kernels."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .analysis import run_metrics
from .config import load_config, with_override, write_resolved
from .errors import ConfigError
from .io import write_json, write_run
from .simulation import run_simulation
from .triggering import MODES, dwell_time
from .verify import kernel_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORTED = 3
EXIT_VERIFY = 4


def _emit(rows, header):
    """Tab-delimited summary on stdout."""
    print("\t".join(header))
    for row in rows:
        print("\t".join(str(row.get(h, "")) for h in header))


def _run_and_write(cfg, mode, out_dir, lyapunov, plots):
    result = run_simulation(cfg, mode, lyapunov=lyapunov)
    metrics = run_metrics(result)
    write_run(result, metrics, out_dir)
    if plots:
        from .plotting import plot_run

        plot_run(result, out_dir)
    return result, metrics


def cmd_simulate(args):
    cfg = load_config(args.config, force_h=args.force_h, echo_dir=args.out)
    result, metrics = _run_and_write(cfg, args.mode, args.out, args.lyapunov, not args.no_plots)
    _emit([metrics], ["mode", "status", "event_count", "t_converge_l", "t_converge_c", "min_gap"])
    return EXIT_ABORTED if result.aborted else EXIT_OK


def _aligned_inputs(results, path):
    # all runs share one config, hence identical recording instants
    t = results[0].series["t_s"]
    header = ["t_s"] + [f"U_{r.mode}" for r in results]
    if "continuous" not in {r.mode for r in results}:
        header.append("U_law")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(t.size):
            row = [t[i]]
            for r in results:
                row.append(r.series["U_applied"][i] if i < r.series["t_s"].size else float("nan"))
            if len(row) < len(header):
                row.append(results[0].series["U_continuous"][i])
            writer.writerow(["%.17g" % v for v in row])


def cmd_compare(args):
    cfg = load_config(args.config, force_h=args.force_h, echo_dir=args.out)
    out = Path(args.out)
    modes = list(MODES)
    with ThreadPoolExecutor(max_workers=len(modes)) as pool:
        futures = [pool.submit(run_simulation, cfg, mode, None, args.lyapunov) for mode in modes]
        results = [f.result() for f in futures]
    rows = []
    for res in results:
        metrics = run_metrics(res)
        write_run(res, metrics, out / res.mode)
        rows.append(metrics)
    header = ["mode", "status", "event_count", "t_converge_l", "t_converge_c", "min_gap", "mean_gap"]
    with open(out / "comparison.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=header, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    _aligned_inputs(results, out / "inputs_aligned.csv")
    if not args.no_plots:
        from .plotting import plot_inputs, plot_lengths, plot_run

        plot_inputs(results, out)
        plot_lengths(results, out)
        for res in results:
            plot_run(res, out / res.mode)
    _emit(rows, header)
    return EXIT_ABORTED if any(r.aborted for r in results) else EXIT_OK


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def cmd_sweep(args):
    base = load_config(args.config, force_h=args.force_h)
    values = [_parse_value(v) for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values", "at least one value required")
    configs = [with_override(base, args.param, v, force_h=args.force_h) for v in values]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_resolved(base, out)
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(lambda c: run_simulation(c, args.mode, None, args.lyapunov), configs))
    rows = []
    for i, (value, res) in enumerate(zip(values, results)):
        metrics = run_metrics(res)
        write_run(res, metrics, out / f"run_{i:03d}")
        rows.append({"param": args.param, "value": value, "final_l_m": float(res.series["l_m"][-1]), **metrics})
    header = ["param", "value", "mode", "status", "event_count", "t_converge_l", "t_converge_c", "min_gap",
              "final_l_m"]
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=header, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    _emit(rows, header)
    return EXIT_ABORTED if any(r.aborted for r in results) else EXIT_OK


def cmd_dwell(args):
    cfg = load_config(args.config, force_h=args.force_h)
    tau = dwell_time(cfg.trigger)
    rows = [{
        "tau_integral_s": "%.10g" % tau.tau_integral,
        "tau_closed_s": "%.10g" % tau.tau_closed,
        "h_s": "%.10g" % cfg.trigger.h,
        "rho1": "%.10g" % cfg.trigger.rho1,
        "q": "%.10g" % cfg.trigger.q,
    }]
    _emit(rows, list(rows[0]))
    return EXIT_OK


def cmd_kernels(args):
    cfg = load_config(args.config, force_h=args.force_h)
    report = kernel_report(cfg)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_json(report, Path(args.out) / "kernel_report.json")
    rows = [{"check": k, "value": "%.3e" % v["value"], "tol": v["tol"], "passed": v["passed"]}
            for k, v in report["checks"].items()]
    _emit(rows, ["check", "value", "tol", "passed"])
    if args.check and not report["passed"]:
        return EXIT_VERIFY
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="axongrowth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=False):
        p.add_argument("--config", required=True, help="JSON config (an empty file means defaults)")
        p.add_argument("--force-h", action="store_true", help="skip the h <= tau load check")
        if out_required is not None:
            p.add_argument("--out", required=out_required, default=None)

    p = sub.add_parser("simulate", help="single closed-loop run")
    common(p, out_required=True)
    p.add_argument("--mode", choices=MODES, default="petc")
    p.add_argument("--lyapunov", action="store_true", help="add the V(t) column")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run all three modes on one config")
    common(p, out_required=True)
    p.add_argument("--lyapunov", action="store_true")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="one run per value of a config field")
    common(p, out_required=True)
    p.add_argument("--param", required=True, help="dotted path, e.g. trigger.sigma")
    p.add_argument("--values", required=True, help="comma separated JSON values")
    p.add_argument("--mode", choices=MODES, default="petc")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--lyapunov", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dwell", help="print the dwell-time bounds and h")
    common(p, out_required=None)
    p.set_defaults(func=cmd_dwell)

    p = sub.add_parser("kernels", help="kernel verification report")
    common(p)
    p.add_argument("--check", action="store_true", help="exit 4 when a check fails")
    p.set_defaults(func=cmd_kernels)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
