"""Command-line entry point: ``qamgame <subcommand> [options]``.

Exit codes:
    0  success
    1  validate-mg1: simulation disagrees with the formula (|z| > 4)
    2  usage or configuration error
    3  a user's delay bound cannot be met
    4  the users' SIR targets are not jointly reachable
    5  numerical failure (root finding, non-convergence)
    6  unstable queue
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from dataclasses import replace

from .config import DEFAULT_SCENARIO, load_scenario
from .errors import (
    BracketError,
    ConfigurationError,
    ConvergenceError,
    DelayInfeasibleError,
    DomainError,
    InstabilityError,
    SystemInfeasibleError,
)
from .modulation import ModulationScheme
from .sweeps import (
    DEFAULT_DELAY_SWEEP,
    DEFAULT_SIR_SWEEP,
    DELAY_SWEEP_COLUMNS,
    SIR_SWEEP_COLUMNS,
    TABLE1_COLUMNS,
    SweepSpec,
    cmd_delay_sweep,
    cmd_nash,
    cmd_sir_sweep,
    cmd_table1,
    cmd_validate_mg1,
    write_csv,
)

log = logging.getLogger("qamgame")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_DELAY_INFEASIBLE = 3
EXIT_SYSTEM_INFEASIBLE = 4
EXIT_NUMERIC = 5
EXIT_UNSTABLE = 6


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario JSON file (default: built-in single user)")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--packet-bits", type=int, help="packet length L in bits")
    common.add_argument("--b-max", type=int, help="largest constellation size considered")
    common.add_argument("--coded", action="store_true", help="also evaluate the trellis-coded model")
    common.add_argument("-v", "--verbose", action="store_true")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--points", type=int, help="number of grid points")
    grid.add_argument("--start", type=float, help="first grid value")
    grid.add_argument("--stop", type=float, help="last grid value")
    grid.add_argument("--linear", action="store_true", help="linear instead of default spacing")

    parser = argparse.ArgumentParser(prog="qamgame", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", parents=[common], help="optimal SIR and peak utility per constellation")
    p.add_argument("--b-list", default="2,4,6,8,10", help="comma-separated even constellation sizes")

    sub.add_parser("sir-sweep", parents=[common, grid], help="normalized utility versus SIR")
    sub.add_parser("delay-sweep", parents=[common, grid], help="single-user best response versus delay bound")
    sub.add_parser("nash", parents=[common], help="multi-user equilibrium report (JSON)")

    p = sub.add_parser("validate-mg1", parents=[common], help="simulate the ARQ queue against the delay formula")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--packets", type=int, default=10**6)
    return parser


def _scenario(args):
    config = load_scenario(args.config) if args.config else DEFAULT_SCENARIO
    changes = {}
    if args.packet_bits is not None:
        changes["packet_bits"] = args.packet_bits
    if args.b_max is not None:
        if args.b_max < 2 or args.b_max % 2:
            raise ConfigurationError(f"--b-max must be an even integer >= 2, got {args.b_max}")
        changes["b_max"] = args.b_max
    if args.coded:
        changes["coding_enabled"] = True
    if changes:
        config = replace(config, **changes)
    return config


def _grid(args, default: SweepSpec) -> SweepSpec:
    spacing = "linear" if args.linear else default.spacing
    return SweepSpec(
        default.variable,
        default.start if args.start is None else args.start,
        default.stop if args.stop is None else args.stop,
        default.points if args.points is None else args.points,
        spacing,
    )


@contextlib.contextmanager
def _output(path):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _run(args) -> int:
    config = _scenario(args)
    if args.command == "table1":
        try:
            b_list = [int(x) for x in args.b_list.split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigurationError(f"bad --b-list: {exc}") from exc
        rows = cmd_table1(config.packet_bits, b_list)
        with _output(args.out) as out:
            write_csv(rows, TABLE1_COLUMNS, out, digits=6)
        return EXIT_OK

    if args.command == "sir-sweep":
        schemes = [ModulationScheme(b, config.packet_bits) for b in range(2, config.b_max + 1, 2)]
        if config.coding_enabled:
            model = config.coding_model()
            schemes += [ModulationScheme(s.b, s.L, model) for s in schemes]
        rows = cmd_sir_sweep(schemes, _grid(args, DEFAULT_SIR_SWEEP))
        with _output(args.out) as out:
            write_csv(rows, SIR_SWEEP_COLUMNS, out)
        return EXIT_OK

    if args.command == "delay-sweep":
        rows = cmd_delay_sweep(config, _grid(args, DEFAULT_DELAY_SWEEP))
        with _output(args.out) as out:
            write_csv(rows, DELAY_SWEEP_COLUMNS, out)
        return EXIT_OK

    if args.command == "nash":
        report = cmd_nash(config)
        with _output(args.out) as out:
            json.dump(report, out, indent=2)
            out.write("\n")
        return EXIT_OK if report["converged"] else EXIT_NUMERIC

    if args.command == "validate-mg1":
        if args.packets < 1:
            raise ConfigurationError(f"--packets must be >= 1, got {args.packets}")
        report = cmd_validate_mg1(config, args.packets, args.seed)
        with _output(args.out) as out:
            for key, value in report.items():
                out.write(f"{key}={value!r}\n" if isinstance(value, float) else f"{key}={value}\n")
        return EXIT_OK if abs(report["z"]) <= 4 else EXIT_VALIDATION

    raise ConfigurationError(f"unknown command {args.command}")  # pragma: no cover


def _report(exc: Exception) -> None:
    print(f"qamgame: error: {exc}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    # a fresh handler per call, so repeated in-process calls log to the current stderr
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return _run(args)
    except DelayInfeasibleError as exc:
        _report(exc)
        return EXIT_DELAY_INFEASIBLE
    except SystemInfeasibleError as exc:
        _report(exc)
        return EXIT_SYSTEM_INFEASIBLE
    except InstabilityError as exc:
        _report(exc)
        return EXIT_UNSTABLE
    except (ConfigurationError, DomainError) as exc:
        _report(exc)
        return EXIT_USAGE
    except (BracketError, ConvergenceError) as exc:
        _report(exc)
        return EXIT_NUMERIC
    finally:
        log.removeHandler(handler)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
