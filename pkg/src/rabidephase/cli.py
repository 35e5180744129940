"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 solver error, 4 truncation
overflow, 5 comparison failure, 6 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import (ConfigError, RabiDephaseError, ShapeMismatchError, SizeError,
                     StepFailureError, TruncationError)
from .exact import integrate_exact
from .observables import asymptotic_predictions
from .oracle import (ConvergenceError, build_liouvillian, compare_states, dump_liouvillian,
                     min_eigenvalue, propagate_oracle)
from .params import ModelParams, dephasing_rates
from .scenario import (PRESETS, EngineSettings, comparison_report, load_config, parse_config,
                       preset, read_timeseries, run_scenario)
from ._integrate import Tolerances

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_TRUNCATION, EXIT_COMPARISON, EXIT_IO = 0, 2, 3, 4, 5, 6


def _engine_overrides(cfg, args):
    changes = {}
    for engine in ("exact", "effective"):
        es = getattr(cfg, engine)
        changes[engine] = EngineSettings(
            rtol=args.rtol if args.rtol is not None else es.rtol,
            atol=args.atol if args.atol is not None else es.atol,
            fixed_step_gt=args.fixed_step if args.fixed_step is not None else es.fixed_step_gt)
    engines = tuple(e.strip() for e in args.engines.split(",")) if args.engines else None
    return cfg.with_overrides(n_max=args.n_max, engines=engines, output_dir=args.out, **changes)


def _resolve(args):
    if getattr(args, "config", None):
        text = Path(args.config).read_text()
        base = preset(args.preset) if getattr(args, "preset", None) else None
        return parse_config(text, base)
    return preset(getattr(args, "preset", None) or "fig1")


def _summarize(result):
    for engine, seconds in result.timings.items():
        last = result.runs[engine].observables[-1]
        print(f"{engine:>9}: {seconds:7.2f} s  <n>={last.mean_n:.6g}  P_e={last.p_e:.6g} "
              f"at gt={last.gt:g}")
    if result.report:
        print(f"agreement: {result.report['agreement_status']}  "
              f"asymptotics: {result.report['asymptotic_status']}  "
              f"transient flagged: {result.report['transient_flagged']}")
    for path in result.files:
        print(f"wrote {path}")


def _simulate(cfg):
    try:
        result = run_scenario(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _summarize(result)
    if result.report and result.report["agreement_status"] != "PASS":
        return EXIT_COMPARISON
    return EXIT_OK


def cmd_simulate(args):
    return _simulate(_engine_overrides(_resolve(args), args))


def cmd_figures(args):
    return _simulate(_engine_overrides(preset(args.figure), args))


def cmd_compare(args):
    cfg = _resolve(args)
    runs = {}
    for path in args.timeseries:
        name = Path(path).stem
        runs[name] = read_timeseries(path)
    report = comparison_report(runs, cfg.params, cfg.report)
    text = json.dumps(report, indent=2)
    if args.report:
        Path(args.report).write_text(text)
    else:
        print(text)
    return EXIT_OK if report["agreement_status"] == "PASS" else EXIT_COMPARISON


def cmd_oracle_check(args):
    cfg = preset(args.preset)
    params = cfg.params
    state0 = cfg.initial.build(args.n_max)
    L = build_liouvillian(params, args.n_max)
    if args.dump:
        dump_liouvillian(L, args.dump)
        print(f"wrote {args.dump}")
    grid = np.asarray(sorted(args.gt)) / params.g
    # both sides share the truncation, so the overflow guard is irrelevant here
    traj = integrate_exact(params, state0, grid[-1], grid, Tolerances(args.rtol, args.atol),
                           truncation_threshold=None)
    worst = 0.0
    for t, state in zip(grid, traj.states):
        ref = propagate_oracle(L, state0, t)
        dev = compare_states(state, ref)
        worst = max(worst, dev.max)
        print(f"gt={t * params.g:g}: max|exact-oracle|={dev.max:.3e} "
              f"(a {dev.a:.1e}, b {dev.b:.1e}, c {dev.c:.1e})  min eig={min_eigenvalue(ref):.2e}")
    ok = worst < args.tolerance
    print(f"{'PASS' if ok else 'FAIL'}: worst deviation {worst:.3e} vs tolerance {args.tolerance:g}")
    return EXIT_OK if ok else EXIT_COMPARISON


def cmd_asymptotics(args):
    if args.preset:
        params = preset(args.preset).params
    else:
        params = ModelParams(args.omega, args.Omega, args.g, args.gamma_a, args.gamma_c)
    pred = asymptotic_predictions(params)
    v1, v2 = dephasing_rates(params)
    out = {"v1": v1, "v2": v2, "slope_n": pred.slope_n,
           "slope_n_per_gt": pred.slope_n / params.g if params.g else None,
           "limit_pe_plus_nsz": pred.limit_pe_plus_nsz, "n2sz_ratio": pred.n2sz_ratio,
           "n2_rate_rule": list(pred.n2_rate_rule), "quadratic_coeff": pred.quadratic_coeff}
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _run_flags(p):
    p.add_argument("--n-max", type=int, help="Fock truncation (inclusive)")
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--fixed-step", type=float, metavar="DGT",
                   help="use fixed-step RK4 with this step in gt units")
    p.add_argument("--engines", help="comma-separated subset of exact,effective,oracle")
    p.add_argument("--out", help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="rabidephase", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario from a config file or preset")
    p.add_argument("--config", help="INI scenario file")
    p.add_argument("--preset", choices=PRESETS, help="preset (base for --config when both given)")
    _run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("figures", help="run one of the built-in figure presets")
    p.add_argument("figure", choices=PRESETS)
    _run_flags(p)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("compare", help="compare time-series files from different engines")
    p.add_argument("timeseries", nargs="+")
    p.add_argument("--config")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle-check", help="exact solver vs dense Liouvillian propagation")
    p.add_argument("--preset", choices=PRESETS, default="fig1")
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--gt", type=float, nargs="+", default=[1.0, 5.0, 10.0])
    p.add_argument("--rtol", type=float, default=1e-8)
    p.add_argument("--atol", type=float, default=1e-10)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--dump", help="write the Liouvillian in binary form to this path")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("asymptotics", help="print the closed-form large-time predictions")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--Omega", type=float, default=1.0)
    p.add_argument("--g", type=float, default=0.04)
    p.add_argument("--gamma-a", type=float, default=0.08)
    p.add_argument("--gamma-c", type=float, default=0.0)
    p.set_defaults(func=cmd_asymptotics)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (StepFailureError, ConvergenceError, SizeError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ShapeMismatchError as exc:
        print(f"comparison error: {exc}", file=sys.stderr)
        return EXIT_COMPARISON
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RabiDephaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
