"""Command-line interface: plan, simulate, bench, validate.

Exit codes are a stable contract:

  0  success
  2  usage error (bad flags, empty suite)
  3  scenario parse/validation failure
  4  planner reported the goal unreachable
  5  a vehicle ended stranded (without --allow-stranded)
  6  suite/oracle configuration error (scenario beyond oracle bounds)

Every flag may also be supplied through a JSON config file (--config);
explicit flags win on conflict. Output files are written to a temporary
sibling and renamed into place, so readers never observe partial files.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
from pathlib import Path

from .evaluate import (
    OracleBoundsError,
    compare_algorithms,
    report_csv,
    report_table,
)
from .graph import Scenario, ScenarioError, load_scenario, snapshot
from .heuristics import HeuristicWeights
from .planners import (
    FOUND,
    SearchParams,
    dijkstra_ucs,
    dyn_a_star,
    greedy_best_first,
    rrt_plan,
    static_a_star,
)
from .simulate import ALGORITHMS, SimConfig, run_simulation

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SCENARIO = 3
EXIT_UNREACHABLE = 4
EXIT_STRANDED = 5
EXIT_SUITE = 6


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _load(path: str) -> Scenario:
    try:
        return load_scenario(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_USAGE) from exc
    except ScenarioError as exc:
        raise CliError(f"{path}: {exc}", EXIT_SCENARIO) from exc


def _parse_weights(text: str) -> HeuristicWeights:
    parts = text.split(",")
    if len(parts) != 4:
        raise CliError("--weights expects wg,w1,w2,w3", EXIT_USAGE)
    try:
        wg, w1, w2, w3 = (float(p) for p in parts)
        return HeuristicWeights(wg, w1, w2, w3)
    except ValueError as exc:
        raise CliError(f"bad --weights: {exc}", EXIT_USAGE) from exc


def _apply_config_file(
    args: argparse.Namespace, parser: argparse.ArgumentParser, argv: list[str] | None
) -> argparse.Namespace:
    """Install config values as defaults and re-parse so explicit flags win."""
    if not getattr(args, "config", None):
        return args
    try:
        overrides = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"bad config file {args.config}: {exc}", EXIT_USAGE) from exc
    if not isinstance(overrides, dict):
        raise CliError("config file must be a JSON object", EXIT_USAGE)
    subparsers = next(
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    )
    subparser = subparsers.choices[args.command]
    updates = {}
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise CliError(f"config file sets unknown option {key!r}", EXIT_USAGE)
        updates[dest] = value
    subparser.set_defaults(**updates)
    return parser.parse_args(argv)


def _sim_config(args: argparse.Namespace) -> SimConfig:
    try:
        return SimConfig(
            epoch_s=float(args.epoch_s),
            hysteresis=float(args.hysteresis),
            share_observations=not args.no_share,
            seed=int(args.seed) if args.seed is not None else 0,
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc


def _override_scenario(scn: Scenario, args: argparse.Namespace) -> Scenario:
    changes = {}
    if args.seed is not None:
        changes["seed"] = int(args.seed)
    if args.alpha is not None:
        alpha = float(args.alpha)
        if not (0.0 < alpha <= 1.0):
            raise CliError("--alpha must be in (0, 1]", EXIT_USAGE)
        fld = scn.initial_field.copy()
        fld.smoothing_alpha = alpha
        changes["alpha"] = alpha
        changes["initial_field"] = fld
    return dataclasses.replace(scn, **changes) if changes else scn


# -- subcommands --------------------------------------------------------------


def cmd_plan(args: argparse.Namespace) -> int:
    scn = _override_scenario(_load(args.scenario), args)
    if not (0 <= args.query < len(scn.queries)):
        raise CliError(
            f"--query {args.query} out of range (scenario has {len(scn.queries)})",
            EXIT_USAGE,
        )
    q = scn.queries[args.query]
    weights = _parse_weights(args.weights) if args.weights else q.weights
    graph = scn.graph.copy()
    fld = scn.initial_field.copy()
    from .graph import apply_event

    for ev in scn.events:
        if ev.at_time <= q.depart_s:
            apply_event(graph, fld, ev)
    snap = snapshot(graph, fld, q.depart_s)
    params = SearchParams(weights=weights, rng_seed=scn.seed)
    plan = {
        "ucs": lambda: dijkstra_ucs(snap, q.start, q.goal),
        "greedy": lambda: greedy_best_first(snap, q.start, q.goal),
        "astar": lambda: static_a_star(snap, q.start, q.goal),
        "rrt": lambda: rrt_plan(snap, q.start, q.goal, params),
        "dyn_astar": lambda: dyn_a_star(snap, q.start, q.goal, params),
    }[args.algo]()
    if plan.status != FOUND:
        print("Unreachable")
        return EXIT_UNREACHABLE
    print("path:", " -> ".join(plan.path))
    print(f"g_cost: {plan.g_cost:.6f}")
    print(f"f_cost: {plan.f_cost_at_goal:.6f}")
    print(f"expanded: {plan.expanded}")
    if args.out:
        _atomic_write(
            Path(args.out),
            json.dumps(
                {
                    "path": list(plan.path),
                    "g_cost": plan.g_cost,
                    "f_cost": plan.f_cost_at_goal,
                    "expanded": plan.expanded,
                    "status": plan.status,
                },
                sort_keys=True,
                indent=2,
            )
            + "\n",
        )
    return EXIT_OK


def _trace_csv(trace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["vehicle", "status", "realized_cost_s", "arrival_s", "replans", "path"])
    for v in trace.vehicles:
        writer.writerow(
            [
                v["vehicle"],
                v["status"],
                f"{v['realized_cost_s']:.6f}",
                "" if v["arrival_s"] is None else f"{v['arrival_s']:.6f}",
                v["replans"],
                "|".join(v["path"]),
            ]
        )
    return buf.getvalue()


def cmd_simulate(args: argparse.Namespace) -> int:
    scn = _override_scenario(_load(args.scenario), args)
    config = _sim_config(args)
    trace = run_simulation(scn, config, args.algo)
    if args.out:
        _atomic_write(
            Path(args.out + ".trace.json"),
            json.dumps(trace.to_dict(), sort_keys=True, indent=2) + "\n",
        )
        _atomic_write(Path(args.out + ".csv"), _trace_csv(trace))
    else:
        sys.stdout.write(_trace_csv(trace))
    stranded = [v["vehicle"] for v in trace.vehicles if v["status"] == "stranded"]
    if stranded and not args.allow_stranded:
        print(f"stranded vehicles: {', '.join(stranded)}", file=sys.stderr)
        return EXIT_STRANDED
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    suite_dir = Path(args.suite)
    paths = sorted(suite_dir.glob("*.scn"))
    if not paths:
        raise CliError(f"no *.scn files in {suite_dir}", EXIT_USAGE)
    rho = float(args.rho)
    if rho < 1.0:
        raise CliError("--rho must be >= 1", EXIT_USAGE)
    config = _sim_config(args)
    try:
        report = compare_algorithms(paths, rho=rho, config=config, jobs=int(args.jobs))
    except ScenarioError as exc:
        raise CliError(str(exc), EXIT_SCENARIO) from exc
    except OracleBoundsError as exc:
        raise CliError(str(exc), EXIT_SUITE) from exc
    table = report_table(report)
    sys.stdout.write(table)
    if args.out:
        _atomic_write(Path(args.out + ".csv"), report_csv(report))
        _atomic_write(Path(args.out + ".txt"), table)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    errors = []
    for path in args.scenarios:
        try:
            load_scenario(Path(path).read_text())
            print(f"{path}: OK")
        except OSError as exc:
            errors.append({"file": path, "error": str(exc)})
        except ScenarioError as exc:
            errors.append({"file": path, "error": str(exc)})
    if errors:
        print(json.dumps({"errors": errors}, sort_keys=True, indent=2))
        return EXIT_SCENARIO
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------


def _add_shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of option defaults; explicit flags win")
    p.add_argument("--seed", type=int, default=None, help="override scenario seed (integer)")
    p.add_argument("--alpha", type=float, default=None,
                   help="observation smoothing factor, in (0, 1]")
    p.add_argument("--epoch-s", dest="epoch_s", type=float, default=30.0,
                   help="replanning epoch length in seconds, > 0 (default 30)")
    p.add_argument("--hysteresis", type=float, default=0.01,
                   help="minimum relative improvement before switching plans, >= 0")
    p.add_argument("--no-share", action="store_true",
                   help="disable observation sharing between vehicles")
    p.add_argument("--out", default=None, help="output path or prefix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynroute",
        description="dynamic-heuristic route planning, fleet simulation and benchmarking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="plan a single scenario query")
    p_plan.add_argument("--scenario", required=True)
    p_plan.add_argument("--algo", choices=ALGORITHMS, default="dyn_astar")
    p_plan.add_argument("--query", type=int, default=0, help="query index, >= 0")
    p_plan.add_argument("--weights", default=None, help="wg,w1,w2,w3 (each >= 0, wg > 0)")
    _add_shared(p_plan)
    p_plan.set_defaults(func=cmd_plan)

    p_sim = sub.add_parser("simulate", help="run the fleet simulation")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--algo", choices=ALGORITHMS, default="dyn_astar")
    p_sim.add_argument("--allow-stranded", action="store_true",
                       help="exit 0 even if vehicles end stranded")
    _add_shared(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_bench = sub.add_parser("bench", help="compare all algorithms over a scenario suite")
    p_bench.add_argument("--suite", required=True, help="directory of *.scn files")
    p_bench.add_argument("--rho", type=float, default=1.15,
                         help="pass threshold multiplier on oracle cost, >= 1 (default 1.15)")
    p_bench.add_argument("--jobs", type=int, default=1, help="parallel scenario workers, >= 1")
    _add_shared(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_val = sub.add_parser("validate", help="validate scenario files without running")
    p_val.add_argument("scenarios", nargs="+", help="scenario files to check")
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config_file(args, parser, argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
