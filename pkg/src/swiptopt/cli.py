"""Command-line front end: solve one instance, verify against the oracle,
or run a rate-energy sweep.

Exit codes: 0 success, 2 usage/config error, 3 infeasible instance,
4 verification failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ._version import __version__
from .ehmodel import SystemParams
from .errors import ConfigError, InfeasibleError
from .oracle import OracleConfig, brute_force, optimality_gap_bound, sample_feasible_instance
from .solver import SolverOptions, choose_circuit_count, solve_joint, solve_time_switching

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_VERIFY = 4
EXIT_IO = 5

_PARAM_KEYS = {
    "h": "h",
    "p_avg_w": "p_avg",
    "q_j": "q_req",
    "p_sat_w": "p_sat",
    "p_circuit_w": "p_circuit",
    "var_antenna_w": "var_antenna",
    "var_conv_w": "var_conv",
    "t_s": "t_sym",
    "zeta": "zeta",
    "m_max": "m_max",
}


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _m_mode(text: str):
    if text == "adaptive":
        return None
    return _positive_int(text)


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha-grid-points", type=_positive_int, default=10_001,
                        help="resolution of the 1-D search grid")
    parser.add_argument("--refine-iterations", type=int, default=40,
                        help="golden-section polish steps around the best grid point")
    parser.add_argument("--feasibility-tol", type=float, default=1e-9,
                        help="relative tolerance for constraint checks")


def _solver_options(args) -> SolverOptions:
    try:
        return SolverOptions(
            alpha_grid_points=args.alpha_grid_points,
            refine_iterations=args.refine_iterations,
            feasibility_tol=args.feasibility_tol,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _load_params(args) -> SystemParams:
    values: dict = {}
    if args.params_file:
        import yaml

        try:
            raw = yaml.safe_load(open(args.params_file, encoding="utf-8"))
        except OSError:
            raise
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {args.params_file}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{args.params_file} must be a key-value mapping")
        unknown = set(raw) - set(_PARAM_KEYS)
        if unknown:
            raise ConfigError(f"unknown parameter keys: {sorted(unknown)}")
        values.update({_PARAM_KEYS[k]: v for k, v in raw.items()})
    for key, field_name in _PARAM_KEYS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            values[field_name] = flag
    missing = [k for k in ("h", "p_avg", "q_req", "p_sat", "p_circuit",
                           "var_antenna", "var_conv") if k not in values]
    if missing:
        raise ConfigError(f"missing required parameters: {missing} "
                          "(pass flags or a --params-file)")
    values.setdefault("t_sym", 1.0)
    values.setdefault("zeta", 1.0)
    values.setdefault("m_max", 1)
    try:
        return SystemParams(
            h=float(values["h"]),
            p_avg=float(values["p_avg"]),
            q_req=float(values["q_req"]),
            p_sat=float(values["p_sat"]),
            p_circuit=float(values["p_circuit"]),
            var_antenna=float(values["var_antenna"]),
            var_conv=float(values["var_conv"]),
            t_sym=float(values["t_sym"]),
            zeta=float(values["zeta"]),
            m_max=int(values["m_max"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid parameters: {exc}") from exc


def cmd_solve(args) -> int:
    params = _load_params(args)
    opts = _solver_options(args)
    base = solve_joint if args.scheme == "joint" else solve_time_switching
    try:
        if args.m is None:
            m_star, sol = choose_circuit_count(params, opts, solver=base)
        else:
            sol = base(params, args.m, opts)
            m_star = args.m
    except InfeasibleError as exc:
        if args.json:
            print(json.dumps({"schema_version": 1, "feasible": False,
                              "reason": exc.reason}))
        else:
            print(f"infeasible: {exc.reason}", file=sys.stderr)
        return EXIT_INFEASIBLE

    payload = {"schema_version": 1, "feasible": True, "scheme": args.scheme,
               "m_star": m_star, **sol.as_dict()}
    if args.json:
        print(json.dumps(payload))
    else:
        label = "adaptive" if args.m is None else f"fixed m={args.m}"
        print(f"scheme        {args.scheme} ({label})")
        print(f"alpha         {sol.alpha:.9g}")
        print(f"rho           {sol.rho:.9g}")
        print(f"p_eh_w        {sol.p_eh:.9g}")
        print(f"p_id_w        {sol.p_id:.9g}")
        print(f"m             {sol.m}")
        print(f"rate_bpcu     {sol.rate:.9g}")
        print(f"energy_j      {sol.energy:.9g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    opts = _solver_options(args)
    try:
        oracle_cfg = OracleConfig(alpha_steps=args.alpha_steps,
                                  rho_steps=args.rho_steps,
                                  peh_steps=args.peh_steps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    rng = np.random.default_rng(args.seed)
    records = []
    worst = 0.0
    total = 0.0
    failures = 0
    for index in range(args.instances):
        params, m = sample_feasible_instance(rng)
        sol = solve_joint(params, m, opts)
        ref = brute_force(params, m, oracle_cfg)
        bound = optimality_gap_bound(params, m, sol, oracle_cfg)
        gap = abs(sol.rate - ref.rate)
        ok = gap <= bound
        failures += not ok
        worst = max(worst, gap)
        total += gap
        records.append({"instance": index, "rate_solver_bpcu": sol.rate,
                        "rate_oracle_bpcu": ref.rate, "gap_bpcu": gap,
                        "bound_bpcu": bound, "within_bound": ok})
        if not args.json:
            print(f"instance {index:3d}  solver {sol.rate:.6f}  "
                  f"oracle {ref.rate:.6f}  gap {gap:.3e}  "
                  f"bound {bound:.3e}  {'ok' if ok else 'VIOLATION'}")
    summary = {"schema_version": 1, "instances": args.instances,
               "max_gap_bpcu": worst, "mean_gap_bpcu": total / args.instances,
               "violations": failures}
    if args.json:
        print(json.dumps({**summary, "records": records}))
    else:
        print(f"max gap  {worst:.3e}")
        print(f"mean gap {total / args.instances:.3e}")
        print(f"violations {failures}/{args.instances}")
    return EXIT_OK if failures == 0 else EXIT_VERIFY


def cmd_sweep(args) -> int:
    from .experiments import export_curves, load_sweep_config, run_sweep

    config = load_sweep_config(args.config)
    if args.seed is not None:
        from dataclasses import replace

        config = replace(config, seed=args.seed)
    curves = run_sweep(config)
    csv_path, json_path = export_curves(curves, args.out, config=config,
                                        basename=args.basename)
    outputs = [csv_path, json_path]
    if not args.no_plot:
        from .plotting import save_re_figure

        outputs.append(save_re_figure(curves, csv_path.with_suffix(".png")))

    print(f"{'scheme':32s} {'points':>6s} {'rate@Qmin':>10s} {'rate@Qmax':>10s} "
          f"{'feas@Qmax':>9s}")
    for curve in curves:
        first, last = curve.points[0], curve.points[-1]
        print(f"{curve.scheme:32s} {len(curve.points):6d} {first.mean_rate:10.4f} "
              f"{last.mean_rate:10.4f} {last.feasible_fraction:9.3f}")
    for path in outputs:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swiptopt",
        description="Joint power-allocation / power-splitting optimizer for "
                    "links that decode data and harvest energy.",
    )
    parser.add_argument("--version", action="version", version=f"swiptopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance")
    p_solve.add_argument("--params-file", help="YAML/JSON file with unit-suffixed keys")
    p_solve.add_argument("--h", type=float, help="channel power gain (linear)")
    p_solve.add_argument("--p-avg-w", type=float, dest="p_avg_w",
                         help="average transmit power budget (W)")
    p_solve.add_argument("--q-j", type=float, dest="q_j",
                         help="required harvested energy per block (J)")
    p_solve.add_argument("--p-sat-w", type=float, dest="p_sat_w",
                         help="per-circuit saturation power (W)")
    p_solve.add_argument("--p-circuit-w", type=float, dest="p_circuit_w",
                         help="decoder circuit consumption (W)")
    p_solve.add_argument("--var-antenna-w", type=float, dest="var_antenna_w",
                         help="antenna noise variance (W)")
    p_solve.add_argument("--var-conv-w", type=float, dest="var_conv_w",
                         help="conversion noise variance (W)")
    p_solve.add_argument("--t-s", type=float, dest="t_s", help="block time (s)")
    p_solve.add_argument("--zeta", type=float, help="conversion efficiency (0, 1]")
    p_solve.add_argument("--m-max", type=_positive_int, dest="m_max",
                         help="maximum number of rectifier circuits")
    p_solve.add_argument("--m", type=_m_mode, default=None,
                         help="circuit count, or 'adaptive' (default)")
    p_solve.add_argument("--scheme", choices=("joint", "ts"), default="joint",
                         help="joint splitting or the split-free baseline")
    p_solve.add_argument("--json", action="store_true", help="machine-readable output")
    _add_solver_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="closed form vs brute force on random instances")
    p_verify.add_argument("--instances", type=_positive_int, default=100)
    p_verify.add_argument("--seed", type=int, default=20_240_817)
    p_verify.add_argument("--alpha-steps", type=int, default=400)
    p_verify.add_argument("--rho-steps", type=int, default=400)
    p_verify.add_argument("--peh-steps", type=int, default=400)
    p_verify.add_argument("--json", action="store_true")
    _add_solver_flags(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="run a rate-energy tradeoff sweep")
    p_sweep.add_argument("config", help="sweep config file (YAML/JSON or a sidecar)")
    p_sweep.add_argument("--out", default="sweep_out", help="output directory")
    p_sweep.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sweep.add_argument("--basename", default="re_sweep", help="output file stem")
    p_sweep.add_argument("--no-plot", action="store_true",
                         help="skip rendering the tradeoff figure")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"infeasible: {exc.reason}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
