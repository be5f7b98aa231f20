"""Command-line front end.

Every subcommand accepts ``--config FILE``, a flat ``key=value`` file whose
keys are flag names (``t-end`` or ``t_end``). Explicit flags override the file,
which overrides the built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BurgersError, ValidationError

log = logging.getLogger("burgers_enstrophy")


def _positive(text: str) -> float:
    try:
        val = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not (math.isfinite(val) and val > 0):
        raise argparse.ArgumentTypeError(f"must be positive and finite, got {text}")
    return val


def _nonneg(text: str) -> float:
    try:
        val = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not (math.isfinite(val) and val >= 0):
        raise argparse.ArgumentTypeError(f"must be non-negative and finite, got {text}")
    return val


def _amplitude(text: str) -> float:
    val = _positive(text)
    if val <= 1.0:
        raise argparse.ArgumentTypeError(f"k must exceed 1, got {text}")
    return val


def _pos_int(text: str) -> int:
    try:
        val = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return val


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {text!r}")


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    out: dict[str, str] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep or not key.strip():
            raise ValidationError(f"{path}:{num}: expected key=value")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _apply_config(parser: argparse.ArgumentParser, config: dict[str, str]) -> None:
    actions = {a.dest: a for a in parser._actions if a.dest not in ("help", "config", "command")}
    defaults = {}
    for key, text in config.items():
        action = actions.get(key)
        if action is None:
            raise ValidationError(f"config key {key!r} is not an option of this command")
        try:
            if isinstance(action, argparse._StoreTrueAction):
                value = _bool(text)
            elif action.nargs in ("+", "*"):
                conv = action.type or str
                value = [conv(v) for v in text.replace(",", " ").split()]
            else:
                value = (action.type or str)(text)
        except argparse.ArgumentTypeError as exc:
            raise ValidationError(f"config key {key!r}: {exc}") from exc
        if action.choices is not None:
            items = value if isinstance(value, list) else [value]
            if any(v not in action.choices for v in items):
                raise ValidationError(f"config key {key!r}: {text!r} not in {list(action.choices)}")
        defaults[key] = value
        action.required = False
    parser.set_defaults(**defaults)


def _emit(obj, path: str | None = None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n")
    print(text)


def _peak_dict(peak) -> dict:
    return {
        "t_star": peak.t_star,
        "E_star": peak.e_star,
        "K_star": peak.k_star,
        "K_drop": peak.k_drop,
        "E0": peak.e_initial,
        "K0": peak.k_initial,
        "interior": peak.interior,
    }


def _family(k: float, l: float | None):
    from .initial_data import DataFamily

    return DataFamily.instant(k) if l is None or l == k else DataFamily.general(k, l)


def cmd_simulate(args) -> int:
    from .field_core import PeriodicGrid
    from .initial_data import sample
    from .periodic_solver import SolverConfig, integrate, peak_from_trajectory, write_trajectory_csv

    config = SolverConfig(args.n, args.t_end, cfl_coefficient=args.cfl, output_stride=args.stride)
    u0 = sample(_family(args.k, args.l), PeriodicGrid(args.n))
    trajectory = integrate(u0, config)
    write_trajectory_csv(trajectory, args.out)
    summary = {"k": args.k, "l": args.l if args.l is not None else args.k, "n": args.n, "t_end": args.t_end}
    summary["trajectory_csv"] = str(args.out)
    summary["peak"] = _peak_dict(peak_from_trajectory(u0, config, trajectory))
    _emit(summary)
    return 0


def cmd_oracle(args) -> int:
    from .field_core import PeriodicGrid
    from .initial_data import sample
    from .periodic_solver import SolverConfig, cole_hopf_periodic, integrate, write_snapshot_csv

    u0 = sample(_family(args.k, args.l), PeriodicGrid(args.n))
    exact = cole_hopf_periodic(u0, args.t)
    summary = {"k": args.k, "l": args.l if args.l is not None else args.k, "n": args.n, "t": args.t}
    if args.out:
        write_snapshot_csv(exact, args.out)
        summary["snapshot_csv"] = str(args.out)
    if args.compare and args.t > 0:
        traj = integrate(u0, SolverConfig(args.n, args.t, cfl_coefficient=args.cfl))
        summary["sup_discrepancy"] = float(np.max(np.abs(traj.final.values - exact.values)))
    _emit(summary)
    return 0


def cmd_maximize(args) -> int:
    from .field_core import PeriodicGrid
    from .maximizer import solve_maximizer, write_profile_csv

    sol = solve_maximizer(args.E)
    summary = {
        "target_E": sol.target_E,
        "k": sol.k,
        "lambda": sol.lam,
        "a_plus": sol.a_plus,
        "a_minus": sol.a_minus,
        "K": sol.K,
        "E": sol.E,
        "R": sol.R,
        "R_over_E53": sol.R / sol.E ** (5.0 / 3.0),
        "K_over_E23": sol.K / sol.E ** (2.0 / 3.0),
    }
    if args.out:
        write_profile_csv(sol, PeriodicGrid(args.n), args.out)
        summary["profile_csv"] = str(args.out)
    _emit(summary)
    return 0


def cmd_family(args) -> int:
    from .field_core import PeriodicGrid
    from .initial_data import LPolicy, closed_form_KE, closed_form_R, k_from_E, sample
    from .periodic_solver import write_snapshot_csv

    if (args.k is None) == (args.E is None):
        raise ValidationError("give exactly one of --k or --E")
    if args.E is not None:
        k, l = k_from_E(args.E, LPolicy.parse(args.policy))
    else:
        k = args.k
        l = args.l if args.l is not None else LPolicy.parse(args.policy).l_of(k)
    K0, E0 = closed_form_KE(k, l)
    summary = {"k": k, "l": l, "K0": K0, "E0": E0, "R0": closed_form_R(k, l)}
    if args.out:
        field_ = sample(_family(k, l), PeriodicGrid(args.n))
        write_snapshot_csv(field_, args.out)
        summary["field_csv"] = str(args.out)
    _emit(summary)
    return 0


def cmd_sweep(args) -> int:
    from .experiments import HorizonRule, SweepSpec, run_sweep
    from .initial_data import LPolicy
    from .periodic_solver import SolverConfig

    out = Path(args.out)
    if out.exists() and not args.append:
        out.unlink()
    spec = SweepSpec(
        policy=LPolicy.parse(args.policy),
        k_list=tuple(args.k),
        solver=SolverConfig(args.n, args.t_end, cfl_coefficient=args.cfl),
        output=out,
        horizon=HorizonRule.parse(args.horizon),
    )
    records = run_sweep(spec, jobs=args.jobs)
    failed = len(spec.k_list) - len(records)
    audits = [r.audit.ok for r in records if r.audit is not None]
    _emit({"csv": str(out), "records": len(records), "failed": failed, "audits_ok": all(audits)})
    if failed:
        from .errors import NumericalError

        raise NumericalError(f"{failed} sweep record(s) failed")
    return 0


def cmd_fit(args) -> int:
    from .experiments import fit_power_law, read_sweep_csv

    rows = read_sweep_csv(args.csv)
    result = fit_power_law(
        rows, args.x, args.y, with_log_correction=args.log_correction, fixed_log_exponent=args.fixed_log_exponent
    )
    _emit(result.to_json_dict(), args.out)
    return 0


def constants_table() -> list[tuple[str, float]]:
    from .experiments import constant_N
    from .field_core import POINCARE_CONSTANT, SHARP_RATE_CONSTANT
    from .initial_data import maximize_F

    l0, F0 = maximize_F()
    return [
        ("F(l0)", F0),
        ("l0", l0),
        ("1/(4 pi^2)", POINCARE_CONSTANT),
        ("N", constant_N()),
        ("3^(5/3)/(5*2^(1/3))", SHARP_RATE_CONSTANT),
        ("6^(-1/3)", 6.0 ** (-1.0 / 3.0)),
    ]


def cmd_constants(args) -> int:
    for name, value in constants_table():
        print(f"{name:<22}{value:.8f}")
    return 0


def cmd_figures(args) -> int:
    from .figures import make_figure

    for path in make_figure(args.which, args.out_dir):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    from .figures import FIGURES

    parser = argparse.ArgumentParser(
        prog="burgers-enstrophy", description="Enstrophy growth in the viscous Burgers equation."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--config", help="flat key=value file of option defaults")
        p.set_defaults(func=func)
        return p

    p = add("simulate", cmd_simulate, "integrate one initial condition and locate its enstrophy peak")
    p.add_argument("--k", type=_amplitude, required=True)
    p.add_argument("--l", type=_positive, default=None, help="shock width (default: l = k)")
    p.add_argument("--n", type=_pos_int, default=1024)
    p.add_argument("--t-end", type=_positive, required=True)
    p.add_argument("--cfl", type=_positive, default=0.5)
    p.add_argument("--stride", type=_pos_int, default=1, help="record every stride-th step")
    p.add_argument("--out", default="trajectory.csv")

    p = add("oracle", cmd_oracle, "exact Cole-Hopf solution at time t")
    p.add_argument("--k", type=_amplitude, required=True)
    p.add_argument("--l", type=_positive, default=None)
    p.add_argument("--n", type=_pos_int, default=1024)
    p.add_argument("--t", type=_nonneg, required=True)
    p.add_argument("--cfl", type=_positive, default=0.5)
    p.add_argument("--compare", action="store_true", help="also integrate and report the sup discrepancy")
    p.add_argument("--out", default=None)

    p = add("maximize", cmd_maximize, "instantaneous maximizer of dE/dt at fixed enstrophy")
    p.add_argument("--E", type=_positive, required=True)
    p.add_argument("--n", type=_pos_int, default=4096)
    p.add_argument("--out", default=None)

    p = add("family", cmd_family, "closed-form K, E, R of the initial-data family")
    p.add_argument("--k", type=_amplitude, default=None)
    p.add_argument("--l", type=_positive, default=None)
    p.add_argument("--E", type=_positive, default=None, help="solve for k at this initial enstrophy")
    p.add_argument("--policy", default="l_equals_k", help="l_equals_k | l_log[:delta] | l_fixed:value")
    p.add_argument("--n", type=_pos_int, default=1024)
    p.add_argument("--out", default=None)

    p = add("sweep", cmd_sweep, "enstrophy-peak sweep over amplitudes k")
    p.add_argument("--policy", default="l_equals_k", help="l_equals_k | l_log[:delta] | l_fixed:value")
    p.add_argument("--k", type=_amplitude, nargs="+", required=True)
    p.add_argument("--n", type=_pos_int, default=2048)
    p.add_argument("--t-end", type=_positive, default=0.05, help="window for the fixed horizon rule")
    p.add_argument("--horizon", default="fixed", help="fixed | logk_k2[:c] | inv_k:c")
    p.add_argument("--cfl", type=_positive, default=0.5)
    p.add_argument("--jobs", type=_pos_int, default=1)
    p.add_argument("--append", action="store_true", help="append to an existing CSV")
    p.add_argument("--out", default="sweep.csv")

    p = add("fit", cmd_fit, "log-log power-law fit of two sweep columns")
    p.add_argument("--csv", required=True)
    p.add_argument("--x", default="E0")
    p.add_argument("--y", default="Estar")
    p.add_argument("--log-correction", action="store_true")
    p.add_argument("--fixed-log-exponent", type=float, default=None)
    p.add_argument("--out", default=None)

    add("constants", cmd_constants, "print the numerical constants")

    p = add("figures", cmd_figures, "emit figure CSV data and SVG plots")
    p.add_argument("--which", choices=sorted(FIGURES), required=True)
    p.add_argument("--out-dir", default="figures")
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser | None:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices.get(name)
    return None


def _config_path(argv: Sequence[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        cfg = _config_path(argv)
        if cfg is not None:
            command = next((tok for tok in argv if not tok.startswith("-")), None)
            target = _subparser(parser, command) if command else None
            if target is None:
                raise ValidationError("--config must follow a subcommand")
            _apply_config(target, read_config(cfg))
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        return args.func(args)
    except BurgersError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
