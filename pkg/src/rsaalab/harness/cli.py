"""Command-line entry point: ``rsaalab <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ..errors import RsaaError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _function(args):
    from ..functions import get_builtin, load_function_config

    if getattr(args, "function_config", None):
        return load_function_config(args.function_config)
    return get_builtin(args.function, args.dim)


def _emit(obj, out=None):
    from ..io import write_json, _json_default

    if out:
        write_json(out, obj)
    else:
        print(json.dumps(obj, sort_keys=True, default=_json_default))


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def cmd_spectrum(args) -> int:
    from ..grid import GridND, build_hamiltonian, build_witten
    from ..spectral import lowest_eigenpairs

    spec = _function(args)
    grid = GridND.uniform(spec.box, args.n)
    op = build_witten(grid, spec, args.beta) if args.operator == "witten" else build_hamiltonian(grid, spec, args.lam)
    sol = lowest_eigenpairs(op, args.k, args.tol)
    _emit({"function": spec.name, "operator": args.operator, "n": args.n, "eigenvalues": sol.values,
           "residuals": sol.residuals, "gap": sol.raw_gap if args.k > 1 else None}, args.out)
    return EXIT_OK


def cmd_gap_sweep(args) -> int:
    from ..grid import GridND
    from ..spectral import gap_sweep
    from .experiments import parse_range

    spec = _function(args)
    text = args.beta if args.operator == "witten" else args.lam
    if text is None:
        raise SystemExit(f"gap-sweep --operator {args.operator} needs --{'beta' if args.operator == 'witten' else 'lam'}")
    curve = gap_sweep(spec, parse_range(text), GridND.uniform(spec.box, args.n), args.operator, args.scaling)
    if args.out:
        curve.to_csv(args.out)
        if args.svg:
            curve.to_svg(args.svg, title=spec.name)
    else:
        from ..io import csv_text

        name = "lambda" if args.operator == "schrodinger" else "beta"
        sys.stdout.write(csv_text([f"param_{name}", "gap"], zip(curve.parameter, curve.gap)))
    for p, msg in curve.failures:
        print(f"warning: no convergence at {p}: {msg}", file=sys.stderr)
    return EXIT_OK


def cmd_potentials(args) -> int:
    from .figures import figure_potentials

    spec = _function(args)
    surf = figure_potentials(spec, args.lam, args.beta, args.n, args.out_dir, rotation=args.rotate)
    _emit({"function": spec.name, "clusters": surf.clusters, "files": {k: str(v) for k, v in surf.paths.items()}})
    return EXIT_OK


def cmd_anneal(args) -> int:
    from .experiments import rsaa_run

    spec = _function(args)
    res = rsaa_run(spec, args.n, args.eps, args.rho, lam_max=args.lam_max, T=args.T, method=args.method)
    _emit(res, args.out)
    return EXIT_OK


def cmd_opt(args) -> int:
    from ..classical import OptimizerConfig, run
    from ..functions import random_block_instance

    params = dict(kv.split("=", 1) for kv in args.param)
    params = {k: _parse_value(v) for k, v in params.items()}
    if args.function == "rotated_blocks":
        target_of = random_block_instance(args.seed, args.dim or 12)
        spec = target_of.spec
    else:
        spec = target_of = _function(args)
    target = (spec.min_value, args.eps) if spec.min_value is not None else None
    for trial in range(args.trials):
        cfg = OptimizerConfig(args.algo, args.seed + trial, args.budget, args.timeout, target, params)
        rec = run(target_of if args.algo == "hessian" else spec, cfg)
        info = {k: v for k, v in rec.info.items() if k not in ("population", "V")}
        rec.info = info
        print(json.dumps(rec.to_json(), sort_keys=True, default=lambda o: np.asarray(o).tolist()))
    return EXIT_OK


def cmd_tts(args) -> int:
    from .tts import ExperimentPlan, run_tts

    if args.config:
        plan = ExperimentPlan.from_json(args.config)
    else:
        if not (args.function and args.dims and args.algo):
            raise SystemExit("tts needs --config or --function, --dims and --algo")
        plan = ExperimentPlan(args.id, args.function, tuple(int(d) for d in args.dims.split(",")),
                              tuple(args.algo), args.trials, args.timeout, args.budget, args.eps, args.seed,
                              args.out_dir)
    if args.out_dir:
        from dataclasses import replace

        plan = replace(plan, out_dir=args.out_dir)
    summary = run_tts(plan)
    _emit(summary.to_json())
    return EXIT_OK


def cmd_morse(args) -> int:
    from ..io import atomic_write_text
    from ..morse import sublevel_pairing

    spec = _function(args)
    pairing = sublevel_pairing(spec, args.resolution)
    if args.dot:
        atomic_write_text(args.dot, pairing.tree.to_dot())
    _emit(pairing.to_json(), args.out)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return EXIT_OK if run_selftest() else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rsaalab", description="Spectral gaps, adiabatic annealing and "
                                "classical optimizer benchmarks on continuous test functions.")
    sub = p.add_subparsers(dest="command", metavar="{spectrum,gap-sweep,potentials,anneal,opt,tts,morse,selftest}")

    def with_function(sp, default="biquartic"):
        sp.add_argument("--function", default=default, help="builtin name (see rsaalab.functions.BUILTINS)")
        sp.add_argument("--function-config", help="JSON file with name, dim, box, expression, minimizer")
        sp.add_argument("--dim", type=int, default=None)
        return sp

    sp = with_function(sub.add_parser("spectrum", help="lowest eigenvalues of H(λ) or the Witten operator"))
    sp.add_argument("--operator", choices=["schrodinger", "witten"], default="schrodinger")
    sp.add_argument("--lam", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=1023)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--out")
    sp.set_defaults(run=cmd_spectrum)

    sp = with_function(sub.add_parser("gap-sweep", help="spectral gap over a parameter range (CSV)"))
    sp.add_argument("--operator", choices=["schrodinger", "witten"], default="schrodinger")
    sp.add_argument("--lam", help="a:b:k or comma list")
    sp.add_argument("--beta", help="a:b:k or comma list")
    sp.add_argument("--scaling", choices=["raw", "rescaled"], default="raw")
    sp.add_argument("--n", type=int, default=1023)
    sp.add_argument("--out")
    sp.add_argument("--svg")
    sp.set_defaults(run=cmd_gap_sweep)

    sp = with_function(sub.add_parser("potentials", help="f, ground-state and WKB surfaces of a 2D function"),
                       "rastrigin_sep")
    sp.add_argument("--lam", type=float, default=5.0)
    sp.add_argument("--beta", type=float, default=5.0)
    sp.add_argument("--n", type=int, default=401)
    sp.add_argument("--rotate", type=float, default=None, help="rotation angle in radians")
    sp.add_argument("--out-dir")
    sp.set_defaults(run=cmd_potentials)

    sp = with_function(sub.add_parser("anneal", help="real-space adiabatic run"))
    sp.add_argument("--n", type=int, default=2047)
    sp.add_argument("--eps", type=float, default=0.05)
    sp.add_argument("--rho", type=float, default=0.2)
    sp.add_argument("--lam-max", type=float, default=None)
    sp.add_argument("--T", type=float, default=None)
    sp.add_argument("--method", choices=["auto", "cn", "adiabatic-frame"], default="auto")
    sp.add_argument("--out")
    sp.set_defaults(run=cmd_anneal)

    sp = with_function(sub.add_parser("opt", help="run a classical optimizer; one JSON record per trial"))
    sp.add_argument("--algo", required=True, help="langevin, gd, basin_hopping, sa, de, honing, hessian")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--budget", type=int, default=1_000_000)
    sp.add_argument("--timeout", type=float, default=600.0)
    sp.add_argument("--eps", type=float, default=1e-3)
    sp.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                    help="algorithm parameter, value parsed as JSON when possible")
    sp.set_defaults(run=cmd_opt)

    sp = sub.add_parser("tts", help="time-to-solution sweep")
    sp.add_argument("--config", help="ExperimentPlan JSON file")
    sp.add_argument("--id", default="tts")
    sp.add_argument("--function")
    sp.add_argument("--dims", help="comma list, ascending")
    sp.add_argument("--algo", action="append", help="algorithm key (repeatable)")
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--budget", type=int, default=1_000_000)
    sp.add_argument("--timeout", type=float, default=600.0)
    sp.add_argument("--eps", type=float, default=1e-3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out-dir")
    sp.set_defaults(run=cmd_tts)

    sp = with_function(sub.add_parser("morse", help="minimum/saddle pairing and barrier H_f"))
    sp.add_argument("--resolution", type=int, default=None)
    sp.add_argument("--dot", help="write the merge tree as Graphviz DOT")
    sp.add_argument("--out")
    sp.set_defaults(run=cmd_morse)

    sp = sub.add_parser("selftest", help="closed-form sanity checks")
    sp.set_defaults(run=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.run(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(f"rsaalab: {exc.code}", file=sys.stderr)
            parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except RsaaError as exc:
        print(f"rsaalab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (KeyError, ValueError) as exc:
        print(f"rsaalab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
