"""Command line: ``relaywise {allocate,sweep,verify}``.

Exit codes: 0 success, 2 bad input, 3 solver error, 4 verification failed.
"""

from __future__ import annotations

import argparse
import sys

from . import emit as out
from .model import to_linear
from .network import MODES, solve_network, sweep
from .oracle import MAX_GRID_USERS, grid_maximize, kkt_check
from .scenario import ScenarioError, load_scenario

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4
GRID_GAP_TOL = 1e-6


class InputError(Exception):
    pass


def _budget(value, db: bool):
    if value is None:
        return None
    return to_linear(value) if db else value


def _modes(text: str) -> list[str]:
    modes = [m.strip() for m in text.split(",") if m.strip()]
    for m in modes:
        if m not in MODES:
            raise InputError(f"unknown mode {m!r}; expected one of {', '.join(MODES)}")
    return modes


def cmd_allocate(args) -> int:
    scenario = load_scenario(args.scenario)
    budget = _budget(args.budget, args.db)
    solution = solve_network(scenario, args.mode, budget)
    if args.out:
        out.emit(solution, args.format, args.out)
    else:
        sys.stdout.write(out.csv_text(solution) if args.format == "csv" else out.json_text(solution))
    print(f"{args.mode}: network sum capacity {solution.sum_capacity:.12g} bits", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    defaults = scenario.metadata.get("sweep", {})
    modes = _modes(args.modes) if args.modes else list(defaults.get("modes", ["ndf", "cf"]))
    lo = _budget(args.min, args.db) if args.min is not None else defaults.get("min")
    hi = _budget(args.max, args.db) if args.max is not None else defaults.get("max")
    points = args.points if args.points is not None else defaults.get("points", 25)
    if args.log:
        spacing = "log"
    elif args.min is not None or args.max is not None:
        spacing = "linear"
    else:
        spacing = defaults.get("spacing", "linear")
    if lo is None or hi is None:
        raise InputError("sweep needs --min and --max (or a 'sweep' block in the scenario)")
    try:
        result = sweep(scenario, modes, lo, hi, points, spacing)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.out:
        out.emit(result, "json" if args.out.endswith(".json") else "csv", args.out)
    else:
        sys.stdout.write(out.csv_text(result))
    if args.svg:
        out.emit(result, "svg", args.svg)
    return EXIT_OK


def cmd_verify(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.allocation:
        try:
            solution = out.load_solution(args.allocation, scenario)
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"{args.allocation}: {exc}") from None
    else:
        solution = solve_network(scenario, args.mode, _budget(args.budget, args.db))

    failures = 0
    for relay in scenario.relays:
        alloc = solution.allocations[relay.id]
        group = relay.with_budget(alloc.budget)
        kkt = kkt_check(group, alloc)
        for user, text in kkt.kkt_violations:
            print(f"relay {relay.id}: KKT violation (user {user}): {text}")
        failures += len(kkt.kkt_violations)
        if len(group.users) <= MAX_GRID_USERS:
            grid = grid_maximize(group, alloc.user_strategy, resolution=args.resolution, prefactor=alloc.prefactor)
            gap = grid.best_sum_capacity - alloc.sum_capacity
            status = "ok" if gap <= GRID_GAP_TOL else "FAIL"
            print(
                f"relay {relay.id}: allocation {alloc.sum_capacity:.12g} bits, "
                f"grid {grid.best_sum_capacity:.12g} bits, gap {gap:.3g} [{status}]"
            )
            failures += gap > GRID_GAP_TOL
        else:
            print(f"relay {relay.id}: {len(group.users)} users, grid search skipped")
    print("verification passed" if not failures else f"verification failed: {failures} violation(s)")
    return EXIT_OK if not failures else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaywise", description="Relay power allocation and strategy selection.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("allocate", help="solve one budget")
    p.add_argument("--scenario", required=True)
    p.add_argument("--mode", required=True, choices=MODES)
    p.add_argument("--budget", type=float, help="relay power for every relay (overrides the file)")
    p.add_argument("--db", action="store_true", help="budgets are given in dB")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("sweep", help="sweep the relay power budget")
    p.add_argument("--scenario", required=True)
    p.add_argument("--modes", help="comma separated, e.g. rdf,ndf,af,cf,hybrid-norss")
    p.add_argument("--min", type=float)
    p.add_argument("--max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--log", action="store_true", help="log-spaced budgets")
    p.add_argument("--db", action="store_true", help="--min/--max are given in dB")
    p.add_argument("--out", help="CSV output (JSON when the name ends in .json)")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check an allocation against the grid oracle and KKT conditions")
    p.add_argument("--scenario", required=True)
    p.add_argument("--mode", choices=MODES, default="ndf")
    p.add_argument("--budget", type=float)
    p.add_argument("--db", action="store_true")
    p.add_argument("--resolution", type=int)
    p.add_argument("--allocation", help="JSON allocation to verify instead of solving")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, RuntimeError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
