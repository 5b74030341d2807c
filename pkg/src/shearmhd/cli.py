"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 hard-invariant failure,
4 numerical abort.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .harness import (
    WindowError,
    fit_decay_rate,
    linear_run_csv,
    linear_sweep_report,
    load_yaml_config,
    make_run_dir,
    regress_scaling,
    robustness_recheck,
    run_sweep,
    solver_config_from_dict,
    sweep_spec_from_dict,
    write_records_csv,
)
from .linear_modes import ModeSystem, Variant
from .multipliers import PropertyLattice, check_properties, log_weight_total
from .nonlinear import BudgetError, NumericalAbort, run, save_snapshot
from .params import ConfigError, PhysicalParams, Regime

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_NUMERICAL = 4


def _add_params_args(p: argparse.ArgumentParser):
    p.add_argument("--nu", type=float, default=0.02)
    p.add_argument("--mu", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--delta0", type=float, default=None)
    p.add_argument("--c1", type=float, default=None)
    p.add_argument("--c2", type=float, default=3001.0)
    p.add_argument("--c3", type=float, default=None)
    p.add_argument("--c4", type=float, default=10.0)


def _params_from_args(args) -> PhysicalParams:
    return PhysicalParams(nu=args.nu, mu=args.mu, beta=args.beta, n=args.n,
                          delta0=args.delta0, c1=args.c1, c2=args.c2,
                          c3=args.c3, c4=args.c4)


def cmd_multipliers_check(args) -> int:
    params = _params_from_args(args)
    lattice = PropertyLattice.default(n_k=args.n_k, n_r=args.n_r, n_t=args.n_t)
    report = check_properties(params, lattice)
    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text)
    if not report.dissipation_gap_holds:
        print("hard inequality failed: dissipation gap", file=sys.stderr)
        return EXIT_INVARIANT
    if not report.m6_bound_demoted_holds:
        print("hard inequality failed: demoted stretching-guard lower bound",
              file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_multipliers_table(args) -> int:
    params = _params_from_args(args)
    ts = np.linspace(args.t_lo, args.t_hi, args.n_t)
    ks = np.array(args.k, dtype=float)
    rs = np.linspace(args.r_lo, args.r_hi, args.n_r)
    out = args.out or "multipliers.csv"
    from .multipliers import log_m1, log_m2, log_m3, log_m4, log_m5, log_m6, log_amp

    with open(out, "w") as fh:
        fh.write("t,k,eta,log_m1,log_m2,log_m3,log_m4,log_m5,log_m6,log_amp,log_total\n")
        for t in ts:
            for k in ks:
                for r in rs:
                    eta = r * k
                    vals = [f(k, eta, t, params)
                            for f in (log_m1, log_m2, log_m3, log_m4, log_m5, log_m6)]
                    row = [t, k, eta, *[float(v) for v in vals],
                           float(log_amp(k, t, params)),
                           float(log_weight_total(k, eta, t, params))]
                    fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(out)
    return EXIT_OK


def cmd_linear_run(args) -> int:
    params = _params_from_args(args)
    variant = Variant.Z_Q if args.variant == "z_q" else Variant.OMEGA_J
    system = ModeSystem(k=args.k, eta=args.eta, params=params, variant=variant)
    t_final = args.t_final or min(20.0 * params.lam ** (-1.0 / 3.0), 400.0)
    out = args.out or f"mode_k{args.k}_eta{args.eta:g}.csv"
    linear_run_csv(out, system, t_final, rtol=args.rtol)
    print(out)
    return EXIT_OK


def cmd_linear_sweep(args) -> int:
    params = _params_from_args(args)
    rep = linear_sweep_report(params, t_final=args.t_final)
    run_dir = make_run_dir(args.out_dir, {"kind": "linear_sweep",
                                          "params": params.to_dict(),
                                          "t_final": args.t_final},
                           "linear sweep")
    path = os.path.join(run_dir, "envelope.json")
    with open(path, "w") as fh:
        json.dump(rep, fh, indent=2)
    print(path)
    return EXIT_OK


def cmd_nonlinear_run(args) -> int:
    doc = load_yaml_config(args.config)
    config = solver_config_from_dict(doc)
    run_dir = make_run_dir(args.out_dir, config.to_dict(), "nonlinear run")
    if args.restart:
        from .nonlinear import load_snapshot

        state, grid, params, t0 = load_snapshot(args.restart)
        if grid != config.grid or params != config.params:
            raise ConfigError(
                "snapshot grid/params do not match the config; refusing to restart")
        result = run(config, state=state, t_start=t0)
    else:
        result = run(config)
    write_records_csv(os.path.join(run_dir, "records.csv"), result.records)
    save_snapshot(os.path.join(run_dir, "final_state.npz"), result.final_state, config)
    summary = {
        "status": result.status,
        "n_steps": result.n_steps,
        "wall_time": result.wall_time,
        "abort_record": result.abort_record,
    }
    with open(os.path.join(run_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    print(run_dir)
    return EXIT_OK if result.status == "ok" else EXIT_NUMERICAL


def cmd_threshold_sweep(args) -> int:
    doc = load_yaml_config(args.config)
    spec = sweep_spec_from_dict(doc)
    run_dir = make_run_dir(args.out_dir, {"kind": "threshold_sweep",
                                          "sweep": spec.to_dict()},
                           "threshold sweep")
    points_dir = os.path.join(run_dir, "points")

    def progress(nu, mu, outcome):
        print(f"  nu={nu:.4g} mu={mu:.4g} eps={outcome.epsilon:.4g} "
              f"-> {outcome.reason}", flush=True)

    results = run_sweep(spec, points_dir, progress=progress if args.verbose else None)
    fits = {}
    for regime in Regime:
        fits[regime.name] = regress_scaling(results, regime).to_dict()
    robustness = []
    if args.robustness_points > 0:
        usable = [r for r in results if r.saturated is None]
        for point in usable[:args.robustness_points]:
            robustness.append(robustness_recheck(spec, point))
    payload = {
        "points": [r.to_dict() for r in results],
        "scaling_fits": fits,
        "robustness": robustness,
    }
    with open(os.path.join(run_dir, "sweep.json"), "w") as fh:
        json.dump(payload, fh, indent=2)
    print(run_dir)
    return EXIT_OK


def cmd_fit_rates(args) -> int:
    params = _params_from_args(args)
    data = np.genfromtxt(args.records, delimiter=",", names=True)
    t = data["t"]
    energy = data["omega_neq_HN"] ** 2 + data["j_neq_HN"] ** 2
    try:
        fit = fit_decay_rate(t, energy, params)
    except WindowError as exc:
        print(f"window error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = json.dumps(fit.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text)
    return EXIT_OK


def cmd_report(args) -> int:
    run_dir = args.run_dir
    manifest_path = os.path.join(run_dir, "manifest.json")
    if not os.path.exists(manifest_path):
        print(f"no manifest found under {run_dir}", file=sys.stderr)
        return EXIT_CONFIG
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    summary = {"manifest": manifest, "outputs": sorted(os.listdir(run_dir))}
    for name in ("sweep.json", "summary.json", "envelope.json"):
        path = os.path.join(run_dir, name)
        if os.path.exists(path):
            with open(path) as fh:
                summary[name] = json.load(fh)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shearmhd",
                                 description="sheared-frame MHD stability lab")
    sub = ap.add_subparsers(dest="command", required=True)

    mp = sub.add_parser("multipliers", help="weight diagnostics")
    msub = mp.add_subparsers(dest="subcommand", required=True)
    mc = msub.add_parser("check", help="run the weight property suite")
    _add_params_args(mc)
    mc.add_argument("--n-k", type=int, default=16)
    mc.add_argument("--n-r", type=int, default=80)
    mc.add_argument("--n-t", type=int, default=80)
    mc.add_argument("--out", default=None)
    mc.set_defaults(func=cmd_multipliers_check)
    mt = msub.add_parser("table", help="emit log-weight values over a grid")
    _add_params_args(mt)
    mt.add_argument("--k", type=int, nargs="+", default=[1, 2, 4, 8])
    mt.add_argument("--t-lo", type=float, default=0.0)
    mt.add_argument("--t-hi", type=float, default=50.0)
    mt.add_argument("--n-t", type=int, default=51)
    mt.add_argument("--r-lo", type=float, default=-20.0)
    mt.add_argument("--r-hi", type=float, default=20.0)
    mt.add_argument("--n-r", type=int, default=21)
    mt.add_argument("--out", default=None)
    mt.set_defaults(func=cmd_multipliers_table)

    lp = sub.add_parser("linear", help="per-mode linear solver")
    lsub = lp.add_subparsers(dest="subcommand", required=True)
    lr = lsub.add_parser("run", help="integrate one mode to CSV")
    _add_params_args(lr)
    lr.add_argument("--k", type=int, required=True)
    lr.add_argument("--eta", type=float, required=True)
    lr.add_argument("--variant", choices=["omega_j", "z_q"], default="omega_j")
    lr.add_argument("--t-final", type=float, default=None)
    lr.add_argument("--rtol", type=float, default=1e-10)
    lr.add_argument("--out", default=None)
    lr.set_defaults(func=cmd_linear_run)
    ls = lsub.add_parser("sweep", help="amplification envelope over the mode sample")
    _add_params_args(ls)
    ls.add_argument("--t-final", type=float, default=None)
    ls.add_argument("--out-dir", default="runs")
    ls.set_defaults(func=cmd_linear_sweep)

    np_ = sub.add_parser("nonlinear", help="full pseudospectral solver")
    nsub = np_.add_subparsers(dest="subcommand", required=True)
    nr = nsub.add_parser("run", help="run a config file")
    nr.add_argument("--config", required=True)
    nr.add_argument("--out-dir", default="runs")
    nr.add_argument("--restart", default=None,
                    help="resume from a state snapshot (.npz)")
    nr.set_defaults(func=cmd_nonlinear_run)

    tp = sub.add_parser("threshold", help="stability threshold experiments")
    tsub = tp.add_subparsers(dest="subcommand", required=True)
    ts = tsub.add_parser("sweep", help="bisect thresholds over a (nu, mu) grid")
    ts.add_argument("--config", required=True)
    ts.add_argument("--out-dir", default="runs")
    ts.add_argument("--robustness-points", type=int, default=0)
    ts.add_argument("--verbose", action="store_true")
    ts.set_defaults(func=cmd_threshold_sweep)

    fp = sub.add_parser("fit", help="regressions on recorded outputs")
    fsub = fp.add_subparsers(dest="subcommand", required=True)
    fr = fsub.add_parser("rates", help="decay-rate fit from a records CSV")
    _add_params_args(fr)
    fr.add_argument("--records", required=True)
    fr.add_argument("--out", default=None)
    fr.set_defaults(func=cmd_fit_rates)

    rp = sub.add_parser("report", help="summarize a run directory")
    rp.add_argument("--run-dir", required=True)
    rp.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
