"""Command-line front end: ``daceq <subcommand> ...``.

Every failure prints one line ``error: <reason>: <message>`` on stderr and
exits with the code listed in ``EXIT_CODES``.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .bands import DEFAULT_DENSITY
from .design import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    ConvergenceError,
    DesignError,
    DesignProblem,
    design,
    verify_design,
)
from .estimate import POWER_CONVENTIONS, builtin_params, evaluate_estimate, round_to_order
from .files import (
    FormatError,
    cache_dir,
    read_filter,
    read_params,
    read_sweep,
    write_filter,
    write_params,
)
from .fir_types import frequency_response, multiplier_count, structural_zeros
from .fitting import FitProblem, default_init, fit, max_estimation_error
from .plotdata import write_plot_data
from .resume import resumable_sweep
from .search import (
    DEFAULT_ORDER_CAP,
    DESK_SHAPE,
    DEFAULT_B_RANGE,
    DEFAULT_DELTA_RANGE,
    EngineSettings,
    OrderCapExceeded,
    OrderSpec,
    minimal_order,
)

log = logging.getLogger("daceq")

EXIT_CODES = {
    "usage": 2,
    "config": 3,
    "invalid-problem": 4,
    "no-convergence": 5,
    "order-cap": 6,
    "io": 7,
    "unknown-row": 8,
}


class CliError(Exception):
    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


# --- parser -------------------------------------------------------------


def _engine_opts(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("engine")
    g.add_argument("--engine", choices=("remez", "lp"), default="remez")
    g.add_argument("--density", type=int, default=DEFAULT_DENSITY, help="grid points per free coefficient")
    g.add_argument("--tol", type=float, default=DEFAULT_TOL)
    g.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)


def _case_opts(p: argparse.ArgumentParser, bandwidth: bool = True) -> None:
    p.add_argument("--pulse", required=True, help="nrtz, rtz, rtc or rtcz")
    p.add_argument("--nb", type=int, required=True, help="Nyquist band (1-6)")
    p.add_argument("--type", dest="filter_type", required=True, help="linear-phase type I-IV")
    if bandwidth:
        p.add_argument("--bandwidth", type=float, required=True, help="B/pi")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="daceq", description="FIR equalizers for DAC pulse droop.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON file of option defaults (flags take precedence)")
        return p

    p = command("design", "design one minimax equalizer")
    _case_opts(p)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--out", help="filter JSON path (default: <pulse>_nb<nb>_<type>_N<order>.json)")
    _engine_opts(p)

    p = command("search", "smallest order meeting an accuracy")
    _case_opts(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--hint", type=int, help="starting order (default: built-in estimate)")
    p.add_argument("--cap", type=int, default=DEFAULT_ORDER_CAP)
    _engine_opts(p)

    p = command("estimate", "closed-form order estimate")
    _case_opts(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--params", help="parameter JSON (default: built-in row)")
    p.add_argument("--convention", choices=POWER_CONVENTIONS, default="signed")

    p = command("sweep", "minimal orders over a bandwidth x accuracy grid (resumable)")
    _case_opts(p, bandwidth=False)
    p.add_argument("--nB", type=int, default=DESK_SHAPE[0])
    p.add_argument("--nD", type=int, default=DESK_SHAPE[1])
    p.add_argument("--b-min", type=float, default=DEFAULT_B_RANGE[0] / math.pi)
    p.add_argument("--b-max", type=float, default=DEFAULT_B_RANGE[1] / math.pi)
    p.add_argument("--delta-min", type=float, default=DEFAULT_DELTA_RANGE[0])
    p.add_argument("--delta-max", type=float, default=DEFAULT_DELTA_RANGE[1])
    p.add_argument("--out", help="sweep CSV (default: in $DACEQ_CACHE_DIR)")
    p.add_argument("--workers", type=int, default=0, help="parallel rows (0: all cores)")
    p.add_argument("--cap", type=int, default=DEFAULT_ORDER_CAP)
    _engine_opts(p)

    p = command("fit", "fit estimate parameters to a sweep")
    p.add_argument("--sweep", required=True, help="sweep CSV")
    p.add_argument("--pulse")
    p.add_argument("--nb", type=int)
    p.add_argument("--type", dest="filter_type")
    p.add_argument("--init", help="starting parameter JSON (default: fallback initialization)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--max-iter", type=int, default=1500)
    p.add_argument("--convention", choices=POWER_CONVENTIONS, default="signed")
    p.add_argument("--out", default="params.json")

    p = command("verify", "check an exported filter against its recorded accuracy")
    p.add_argument("--filter", required=True, help="filter JSON")
    p.add_argument("--dense-factor", type=int, default=8)

    p = command("plot-data", "CSV series for the pulse, magnitude and order figures")
    p.add_argument("--outdir", default="plot-data")
    p.add_argument("--which", nargs="+", choices=("pulses", "magnitude", "orders"),
                   default=["pulses", "magnitude", "orders"])
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--bandwidths", type=float, nargs="+", help="B/pi values for the order series")
    p.add_argument("--cap", type=int, default=DEFAULT_ORDER_CAP)
    _engine_opts(p)
    return parser


# --- config -------------------------------------------------------------


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _apply_config(sub: argparse.ArgumentParser, path: str) -> None:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError("config", f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError("config", f"{path}: not valid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise CliError("config", f"{path}: top level must be an object")
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest == "type":
            dest = "filter_type"
        a = actions.get(dest)
        if a is None or dest in ("help", "config"):
            raise CliError("config", f"{path}: unknown option {key!r} for this command")
        try:
            if a.nargs in ("+", "*"):
                value = [a.type(v) if a.type else v for v in value]
            elif a.type is not None:
                value = a.type(value)
        except (TypeError, ValueError):
            raise CliError("config", f"{path}: bad value {value!r} for {key!r}") from None
        if a.choices is not None and any(v not in a.choices for v in (value if isinstance(value, list) else [value])):
            raise CliError("config", f"{path}: {key!r} must be one of {sorted(a.choices)}")
        defaults[dest] = value
        a.required = False
    sub.set_defaults(**defaults)


def parse_args(argv=None) -> argparse.Namespace:
    """Parse flags, layering a ``--config`` JSON file beneath them."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cmd = next((a for a in argv if not a.startswith("-")), None)
        if cmd is None:
            parser.parse_args(argv)
        try:
            sub = _subparser(parser, cmd)
        except KeyError:
            parser.parse_args(argv)  # reports the bad command
        _apply_config(sub, known.config)
    return parser.parse_args(argv)


# --- commands -----------------------------------------------------------


def _settings(args) -> EngineSettings:
    return EngineSettings(args.engine, args.density, args.tol, args.max_iter, getattr(args, "cap", DEFAULT_ORDER_CAP))


def _report(pairs) -> None:
    for k, v in pairs:
        if isinstance(v, float):
            v = repr(v)
        print(f"{k}: {v}")


def cmd_design(args) -> int:
    problem = DesignProblem.create(args.pulse, args.nb, args.filter_type, args.order, args.bandwidth * math.pi)
    result = design(problem, args.engine, args.density, args.tol, args.max_iter)
    out = args.out or f"{problem.kind.name.lower()}_nb{args.nb}_{problem.filter_type.name}_N{args.order}.json"
    write_filter(out, result, problem)
    _report(
        [
            ("delta_N", result.delta_N),
            ("delay_K", result.delay.K),
            ("multipliers", multiplier_count(problem.filter_type, problem.order)),
            ("engine", result.engine),
            ("iterations", result.iterations),
            ("extremal_wT_over_pi", " ".join(f"{w / math.pi:.6f}" for w in result.extremal_frequencies)),
            ("coefficients_file", out),
        ]
    )
    return 0


def cmd_search(args) -> int:
    spec = OrderSpec(args.pulse, args.nb, args.filter_type, args.bandwidth * math.pi, args.delta)
    n, result = minimal_order(spec, args.hint, _settings(args))
    _report([("n_min", n), ("delta_N", result.delta_N), ("delay_K", result.delay.K),
             ("multipliers", multiplier_count(spec.filter_type, n))])
    return 0


def cmd_estimate(args) -> int:
    if args.params:
        params, eps_max = read_params(args.params)
    else:
        params, eps_max = builtin_params(args.pulse, args.nb, args.filter_type)
    OrderSpec(args.pulse, args.nb, args.filter_type, args.bandwidth * math.pi, args.delta)
    raw = evaluate_estimate(params, args.bandwidth * math.pi, args.delta, args.convention)
    if not np.isfinite(raw):
        raise CliError("invalid-problem", f"estimate is not finite at B/pi={args.bandwidth}, delta={args.delta}")
    _report([("n_est_raw", raw), ("n_est", round_to_order(raw, args.filter_type)),
             ("eps_max", "" if eps_max is None else eps_max)])
    return 0


def cmd_sweep(args) -> int:
    settings = _settings(args)
    out = args.out or str(cache_dir() / f"{args.pulse.lower()}_nb{args.nb}_{args.filter_type.upper()}_{args.nB}x{args.nD}.csv")
    OrderSpec(args.pulse, args.nb, args.filter_type, args.b_min * math.pi, args.delta_max)
    grid, calls = resumable_sweep(
        out, args.pulse, args.nb, args.filter_type,
        (args.b_min * math.pi, args.b_max * math.pi), args.nB,
        (args.delta_min, args.delta_max), args.nD, settings, args.workers or None,
    )
    _report([("sweep_file", out), ("cells", grid.n_min.size), ("failed_cells", int((~grid.valid).sum())),
             ("design_calls", calls)])
    return 0


def cmd_fit(args) -> int:
    grid = read_sweep(args.sweep, args.pulse, args.nb, args.filter_type)
    init = read_params(args.init)[0] if args.init else default_init(grid.kind, grid.nb, grid.filter_type)
    res = fit(FitProblem(grid, init, convention=args.convention), max_iter=args.max_iter, seed=args.seed,
              restarts=args.restarts)
    params = res.params
    params.provenance.update(source="fit", seed=args.seed, sweep=os.path.basename(args.sweep),
                             pulse=grid.kind.name, nb=grid.nb, filter_type=grid.filter_type.name)
    write_params(args.out, params, res.eps)
    pairs = [("eps", res.eps), ("init_eps", res.init_eps)]
    try:
        builtin, _ = builtin_params(grid.kind, grid.nb, grid.filter_type)
        pairs.append(("builtin_eps", max_estimation_error(builtin, grid, args.convention)[0]))
    except KeyError:
        pass
    _report(pairs + [("params_file", args.out)])
    return 0


def cmd_verify(args) -> int:
    filt, problem, data = read_filter(args.filter)
    peak, worst = verify_design(filt, problem, args.dense_factor)
    zeros = structural_zeros(problem.filter_type)
    zmax = float(np.abs(frequency_response(filt.coefficients, np.array(zeros))).max()) if zeros else 0.0
    recorded = data.get("delta_achieved")
    _report(
        [
            ("delta_verified", peak),
            ("worst_wT_over_pi", worst / math.pi),
            ("delta_recorded", "" if recorded is None else float(recorded)),
            ("delay_K", problem.delay.K),
            ("structural_zero_max", zmax),
        ]
    )
    return 0


def cmd_plotdata(args) -> int:
    paths = write_plot_data(args.outdir, tuple(args.which), args.delta, args.bandwidths, _settings(args))
    for p in paths:
        print(p)
    return 0


COMMANDS = {
    "design": cmd_design,
    "search": cmd_search,
    "estimate": cmd_estimate,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "verify": cmd_verify,
    "plot-data": cmd_plotdata,
}


def _fail(reason: str, message: str) -> int:
    print(f"error: {reason}: {' '.join(str(message).split())}", file=sys.stderr)
    return EXIT_CODES[reason]


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except CliError as exc:
        return _fail(exc.reason, str(exc))
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        return _fail(exc.reason, str(exc))
    except ConvergenceError as exc:
        return _fail("no-convergence", str(exc))
    except OrderCapExceeded as exc:
        return _fail("order-cap", str(exc))
    except KeyError as exc:
        return _fail("unknown-row", exc.args[0] if exc.args else "no built-in parameters for this case")
    except (FormatError, OSError) as exc:
        return _fail("io", str(exc))
    except (DesignError, ValueError) as exc:
        return _fail("invalid-problem", str(exc))


if __name__ == "__main__":
    sys.exit(main())
