"""Command line entry point: ``clpositivity {tmin,scan,steady,oracle}``.

Exit codes: 0 success, 2 usage/config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ScenarioConfig
from .errors import DomainError, ExponentOverflowError, InfeasibleError, QuadratureError, StepSizeError
from .evolution import EvolvedDensity
from .model import Case
from .observables import scan
from .oracle import equivalence_lattice, min_kernel_eigenvalue, temperature_monotonicity_check
from .steady import Infeasible, positivity_condition, steady_spectrum, t_min

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
CSV_HEADER = "tau,purity,purity_err,sigma_rs_4,purity_violation,uncertainty_violation"
NUMERIC_ERRORS = (QuadratureError, StepSizeError, ExponentOverflowError, FloatingPointError, np.linalg.LinAlgError)


def fmt(value) -> str:
    return "%.12g" % value


def _add_scenario_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="scenario file (JSON or key = value lines)")
    p.add_argument("--case", help="diffusion case: I, II, III, IV")
    p.add_argument("--gamma", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--temperature", type=float)
    p.add_argument("--temperature-multiple", type=float, help="temperature as a multiple of t_min")
    p.add_argument("--cutoff", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--t-start", type=float)
    p.add_argument("--t-end", type=float, help="default 50/gamma")
    p.add_argument("--samples", type=int)
    p.add_argument("--linear", dest="log_spacing", action="store_const", const=False, default=None,
                   help="linear instead of log-spaced time grid")
    p.add_argument("--nodes", type=int, help="starting Gauss-Legendre nodes per axis")
    p.add_argument("--refine-tol", type=float)
    p.add_argument("--n-sigma", type=float)
    p.add_argument("--flag-tol", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--output", "-o", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clpositivity",
                                     description="Positivity diagnostics for the damped oscillator master equation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tmin", help="minimum bath temperature per diffusion case")
    p.add_argument("--case", default="all", help="I, II, III, IV or all")
    p.add_argument("--gamma", type=float, default=0.15)
    p.add_argument("--cutoff", type=float, default=1.25)
    p.add_argument("--omega", type=float, default=1.0)

    p = sub.add_parser("scan", help="purity and 4 sigma_RS time series")
    _add_scenario_flags(p)
    p.add_argument("--dump-config", metavar="PATH", help="write the resolved scenario as JSON and continue")
    p.add_argument("--gnuplot", metavar="PATH", help="also write a gnuplot script for the CSV output")

    p = sub.add_parser("steady", help="stationary spectrum as JSON")
    p.add_argument("--case", default="I")
    p.add_argument("--gamma", type=float, default=0.35)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--temperature", type=float)
    p.add_argument("--temperature-multiple", type=float)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--count", type=int, default=10, help="number of eigenvalues to list")

    p = sub.add_parser("oracle", help="independent checks as a JSON report")
    _add_scenario_flags(p)
    p.add_argument("--tau", type=float, action="append", help="time for a kernel eigenvalue report (repeatable)")
    p.add_argument("--grid-half-width", type=float, help="override the kernel grid half-width")
    p.add_argument("--grid-nodes", type=int, help="override the kernel grid node count")
    p.add_argument("--monotonicity-tau", type=float, action="append")
    p.add_argument("--delta-t", type=float, default=1e-3, help="temperature step for dP/dT")
    return parser


def _scenario(args) -> ScenarioConfig:
    base = ScenarioConfig.load(args.config) if getattr(args, "config", None) else ScenarioConfig()
    names = set(ScenarioConfig.field_names())
    overrides = {k: v for k, v in vars(args).items() if k in names}
    return base.merged(overrides)


def _write(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_tmin(args) -> int:
    cases = ["I", "II", "III", "IV"] if args.case.lower() == "all" else [args.case]
    lines = ["case,t_min"]
    for tag in cases:
        value = t_min(Case.parse(tag), args.gamma, args.omega, args.cutoff)
        lines.append(f"{Case.parse(tag).value},{value if isinstance(value, Infeasible) else fmt(value)}")
    print("\n".join(lines))
    return EXIT_OK


def series_csv(series) -> str:
    out = [CSV_HEADER]
    for i, tau in enumerate(series.times):
        out.append(",".join((
            fmt(tau), fmt(series.purity[i]), fmt(series.purity_err[i]), fmt(series.sigma_rs_4[i]),
            str(int(series.purity_violation[i])), str(int(series.uncertainty_violation[i])),
        )))
    return "\n".join(out) + "\n"


def series_json(series, metadata) -> str:
    rows = [
        {
            "tau": float(series.times[i]),
            "purity": None if math.isnan(series.purity[i]) else float(series.purity[i]),
            "purity_err": None if math.isnan(series.purity_err[i]) else float(series.purity_err[i]),
            "sigma_rs_4": float(series.sigma_rs_4[i]),
            "purity_violation": bool(series.purity_violation[i]),
            "uncertainty_violation": bool(series.uncertainty_violation[i]),
            "failed": bool(series.failed[i]),
        }
        for i in range(series.times.size)
    ]
    return json.dumps({"metadata": metadata, "rows": rows}, indent=2, sort_keys=True) + "\n"


def gnuplot_script(csv_path) -> str:
    return "\n".join((
        "set datafile separator ','",
        "set logscale xy",
        "set xlabel 'tau'",
        "set key autotitle columnhead",
        f"plot '{csv_path}' using 1:2 with lines title 'purity', \\",
        f"     '{csv_path}' using 1:4 with lines dashtype 2 title '4 sigma_RS'",
        "pause -1",
        "",
    ))


def cmd_scan(args) -> int:
    cfg = _scenario(args)
    params, state = cfg.model_params(), cfg.state()
    quad, grid = cfg.quadrature(), cfg.time_grid()
    if args.dump_config:
        Path(args.dump_config).write_text(cfg.to_json() + "\n", encoding="utf-8")
    series = scan(EvolvedDensity(state, params), grid, quad, flag_tol=cfg.flag_tol, workers=cfg.workers)
    metadata = {
        "case": params.case.value, "gamma": params.gamma, "omega": params.omega,
        "temperature": params.temperature, "cutoff": params.cutoff, "n": state.n, "beta": state.beta,
        "d_pp": params.d_pp, "d_px": params.d_px, "samples": int(grid.size),
        "failed_samples": int(series.failed.sum()),
    }
    if cfg.format == "json":
        _write(series_json(series, metadata), cfg.output)
    else:
        _write(series_csv(series), cfg.output)
        print("# " + json.dumps(metadata, sort_keys=True), file=sys.stderr)
    if args.gnuplot:
        Path(args.gnuplot).write_text(gnuplot_script(cfg.output or "scan.csv"), encoding="utf-8")
    if series.any_failed:
        print(f"error: {int(series.failed.sum())} sample(s) failed to converge", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_steady(args) -> int:
    cfg = ScenarioConfig(case=args.case, gamma=args.gamma, omega=args.omega, temperature=args.temperature,
                         temperature_multiple=args.temperature_multiple, cutoff=args.cutoff)
    params = cfg.model_params()
    report = {"case": params.case.value, "gamma": params.gamma, "omega": params.omega,
              "temperature": params.temperature, "cutoff": params.cutoff,
              "d_pp": params.d_pp, "d_px": params.d_px, "positive": positivity_condition(params)}
    # infeasible: no temperature yields a positive stationary state (t_min has no value)
    floor = t_min(params.case, params.gamma, params.omega, params.cutoff) if params.case is Case.IV else None
    report["infeasible"] = isinstance(floor, Infeasible)
    if report["infeasible"]:
        report["reason"] = floor.reason
    try:
        spectrum = steady_spectrum(params)
    except InfeasibleError as exc:
        report.update({"infeasible": True, "normalisable": False, "reason": str(exc)})
    else:
        report.update({
            "normalisable": True, "a_coef": spectrum.a_coef, "c_coef": spectrum.c_coef, "eps0": spectrum.eps0,
            "eps": spectrum.eps, "purity": spectrum.purity, "eigenvalues": spectrum.eigenvalues(args.count).tolist(),
        })
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _scenario(args)
    params, state = cfg.model_params(), cfg.state()
    evolved = EvolvedDensity(state, params)
    eq = equivalence_lattice(evolved)
    report = {"equivalence": {"max_rel_dev": eq.max_rel_dev, "points": eq.points, "tol": eq.tol,
                              "passed": eq.passed}}
    grid = None
    if args.grid_half_width is not None or args.grid_nodes is not None:
        half = args.grid_half_width or 10.0
        nodes = args.grid_nodes or 201
        if nodes < 3 or nodes % 2 == 0:
            raise ConfigError("grid_nodes", "must be an odd integer >= 3")
        grid = np.linspace(-half, half, nodes)
    eigen = []
    for tau in args.tau or [1.0]:
        rep = min_kernel_eigenvalue(evolved, tau, grid)
        eigen.append({
            "tau": tau, "min_eigenvalue": rep.min_eigenvalue, "max_eigenvalue": rep.max_eigenvalue,
            "negative": rep.min_eigenvalue < -1e-8, "trace_residue": rep.trace_residue,
            "hermiticity_residue": rep.hermiticity_residue, "half_width": rep.half_width, "nodes": rep.nodes,
            "coverage_sigmas": rep.coverage_sigmas, "aliasing_estimate": rep.aliasing_estimate,
            "coverage_ok": rep.coverage_ok,
        })
        if not rep.coverage_ok:
            print(f"warning: kernel grid at tau={tau} covers {rep.coverage_sigmas:.2f} sigma "
                  f"(aliasing estimate {rep.aliasing_estimate:.2e})", file=sys.stderr)
    report["eigen"] = eigen
    checks = [eq.passed] + [e["coverage_ok"] for e in eigen]
    if params.case.value in ("I", "II", "III"):
        taus = args.monotonicity_tau or [0.5, 1, 2, 5, 20]
        mono = temperature_monotonicity_check(evolved, taus, args.delta_t, cfg.quadrature())
        report["monotonicity"] = {"tau": mono.taus.tolist(), "dP_dT": mono.dpdT.tolist(),
                                  "max_excursion": mono.max_excursion, "passed": mono.passed}
        checks.append(mono.passed)
    report["passed"] = all(checks)
    _write(json.dumps(report, indent=2, sort_keys=True) + "\n", cfg.output)
    return EXIT_OK if report["passed"] else EXIT_NUMERIC


COMMANDS = {"tmin": cmd_tmin, "scan": cmd_scan, "steady": cmd_steady, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
