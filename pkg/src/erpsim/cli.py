"""Command-line interface.

Subcommands:
  check     evaluate winning certificates for a scenario; exit 0 when some
            certified assignment covers every evader, 2 otherwise
  run       simulate a scenario and write trajectory.csv, events.json,
            plot.svg, and certificate_report.json
  allocate  dump the certified game graph and the solved assignment as JSON

Exit codes: 0 success/certified, 2 not certified, 1 error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import yaml

from .allocation import (
    ZMode,
    build_conflict_graph,
    build_game_graph,
    coalition_vertices,
    solve_bip,
)
from .engine import TrajectoryLog, coalition_id, evader_id, pursuer_id, run_simulation
from .erp import certify_1v1, certify_2v1, cm1, cm2
from .errors import ErpsimError
from .pef import PairState
from .safe_distance import CoalitionState
from .scenario_io import ScenarioError, load_scenario
from .svgplot import render_svg


def _fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.12g}"


def _load(path: str):
    try:
        return load_scenario(path)
    except FileNotFoundError:
        print(f"error: no such file: {path}", file=sys.stderr)
        sys.exit(1)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        print(f"error: invalid YAML{loc}: {exc}", file=sys.stderr)
        sys.exit(1)
    except ScenarioError as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        sys.exit(1)


def _edge_report(scenario) -> list[dict]:
    """Certificate details for every coalition/evader pairing, including the
    uncertified ones the game-graph builder would drop."""
    report = []
    for coalition in coalition_vertices(len(scenario.pursuers)):
        for j, evader in enumerate(scenario.evaders):
            try:
                if len(coalition) == 1:
                    cert = certify_1v1(
                        PairState(scenario.pursuers[coalition[0]], evader),
                        scenario.goal,
                        relaxed=True,
                        cfg=scenario.numeric,
                    )
                else:
                    cert = certify_2v1(
                        CoalitionState(tuple(scenario.pursuers[i] for i in coalition), evader),
                        scenario.goal,
                        relaxed=True,
                        cfg=scenario.numeric,
                    )
            except ErpsimError as exc:
                report.append(
                    {
                        "coalition": coalition_id(coalition),
                        "evader": evader_id(j),
                        "error": str(exc),
                    }
                )
                continue
            members = [scenario.pursuers[i] for i in coalition]
            alphas = [p.v_max / evader.v_max for p in members]
            if len(coalition) == 1:
                cm = cm1(alphas[0]) if alphas[0] > 3.0 else None
            else:
                cm = cm2(alphas[0], alphas[1]) if min(alphas) > 3.0 else None
            report.append(
                {
                    "coalition": coalition_id(coalition),
                    "evader": evader_id(j),
                    "alpha": alphas[0] if len(alphas) == 1 else alphas,
                    "r": members[0].capture_radius
                    if len(members) == 1
                    else [p.capture_radius for p in members],
                    "kappa": members[0].kappa if len(members) == 1 else [p.kappa for p in members],
                    "cm": cm,
                    "threshold": None if math.isinf(cert.threshold) else cert.threshold,
                    "rho": None if math.isnan(cert.observed_rho) else cert.observed_rho,
                    "verdict": cert.winner.value,
                    "theorem": cert.which_theorem.value if cert.which_theorem else None,
                }
            )
    return report


def cmd_check(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    _apply_overrides(scenario, args)
    report = _edge_report(scenario)
    for row in report:
        if "error" in row:
            print(f"{row['coalition']} vs {row['evader']}: solver error: {row['error']}")
            continue
        gate = "pass" if row["cm"] is not None and row["threshold"] is not None else "fail"
        print(
            f"{row['coalition']} vs {row['evader']}: parameter gate {gate}"
            f" | cm={_fmt(row['cm']) if row['cm'] is not None else 'n/a'}"
            f" | threshold={_fmt(row['threshold']) if row['threshold'] is not None else 'n/a'}"
            f" | rho={_fmt(row['rho']) if row['rho'] is not None else 'n/a'}"
            f" | verdict={row['verdict']}"
            + (f" ({row['theorem']})" if row["theorem"] else "")
        )
    graph = build_game_graph(
        scenario.pursuers, scenario.evaders, scenario.goal, scenario.numeric, relaxed=True
    )
    matching = solve_bip(graph, build_conflict_graph(graph), scenario.z_mode)
    covered = {ev for _, ev in matching.assignments}
    all_covered = covered == set(range(len(scenario.evaders)))
    print(
        f"certified assignment covers {len(covered)}/{len(scenario.evaders)} evaders: "
        + ", ".join(
            f"{coalition_id(c)}->{evader_id(e)}" for c, e in matching.assignments
        )
    )
    return 0 if all_covered else 2


def _write_csv(path: str, scenario, log: TrajectoryLog) -> None:
    coalitions = coalition_vertices(len(scenario.pursuers))
    edge_cols = [
        (c, j) for c in coalitions for j in range(len(scenario.evaders))
    ]
    header = ["t"]
    for i in range(len(scenario.pursuers)):
        pid = pursuer_id(i)
        header += [f"{pid}.x", f"{pid}.y", f"{pid}.theta", f"{pid}.u"]
    for j in range(len(scenario.evaders)):
        eid = evader_id(j)
        header += [f"{eid}.x", f"{eid}.y", f"{eid}.theta", f"{eid}.u"]
    header += [f"edge.{coalition_id(c)}-{evader_id(j)}.rho" for c, j in edge_cols]
    lines = [",".join(header)]
    for tick in log.ticks:
        row = [_fmt(tick.t)]
        for px, py, theta, u in tick.pursuers:
            row += [_fmt(px), _fmt(py), _fmt(theta), _fmt(u)]
        for ex, ey, ux, uy, _status in tick.evaders:
            # evader heading/magnitude of its current control fill the same
            # column pattern as pursuers
            row += [_fmt(ex), _fmt(ey), _fmt(math.atan2(uy, ux)), _fmt(math.hypot(ux, uy))]
        for c, j in edge_cols:
            rho = tick.edge_rhos.get((c, j))
            row.append(_fmt(rho) if rho is not None else "")
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_run(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    _apply_overrides(scenario, args)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        name: os.path.join(out_dir, name)
        for name in ("trajectory.csv", "events.json", "plot.svg", "certificate_report.json")
    }
    try:
        report = _edge_report(scenario)
        log = run_simulation(scenario)
        _write_csv(paths["trajectory.csv"], scenario, log)
        with open(paths["events.json"], "w", encoding="utf-8") as fh:
            json.dump(
                [{"t": ev.t, "kind": ev.kind, "actors": ev.actors} for ev in log.events],
                fh,
                indent=2,
            )
        with open(paths["plot.svg"], "w", encoding="utf-8") as fh:
            fh.write(render_svg(scenario, log))
        with open(paths["certificate_report.json"], "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    except Exception:
        for p in paths.values():
            if os.path.exists(p):
                os.remove(p)
        raise
    n_cap = sum(1 for ev in log.events if ev.kind == "Capture")
    n_arr = sum(1 for ev in log.events if ev.kind == "Arrival")
    print(
        f"simulated {len(log.ticks)} ticks: {n_cap} captured, {n_arr} arrived; "
        f"outputs in {out_dir}"
    )
    return 0


def cmd_allocate(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    _apply_overrides(scenario, args)
    graph = build_game_graph(
        scenario.pursuers, scenario.evaders, scenario.goal, scenario.numeric, relaxed=True
    )
    conflicts = build_conflict_graph(graph)
    matching = solve_bip(graph, conflicts, scenario.z_mode)
    out = {
        "coalitions": [coalition_id(c) for c in graph.coalition_vertices],
        "evaders": [evader_id(j) for j in graph.evader_vertices],
        "edges": [
            {
                "coalition": coalition_id(e.coalition),
                "evader": evader_id(e.evader),
                "rho": e.rho,
                "theorem": e.certificate.which_theorem.value
                if e.certificate.which_theorem
                else None,
            }
            for e in graph.edges
        ],
        "conflicts": sorted(sorted(pair) for pair in conflicts.conflicts),
        "matching": [
            {"coalition": coalition_id(c), "evader": evader_id(j)}
            for c, j in matching.assignments
        ],
        "objective": matching.objective,
        "z_mode": matching.z_mode.value,
    }
    json.dump(out, sys.stdout, indent=2)
    print()
    return 0


def _apply_overrides(scenario, args: argparse.Namespace) -> None:
    if getattr(args, "dt", None) is not None:
        scenario.dt = args.dt
    if getattr(args, "seed", None) is not None:
        scenario.seed = args.seed
    if getattr(args, "z_mode", None) is not None:
        scenario.z_mode = ZMode(args.z_mode)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", help="scenario YAML file")
    p.add_argument("--dt", type=float, default=None, help="override time step")
    p.add_argument("--seed", type=int, default=None, help="override random seed")
    p.add_argument(
        "--z-mode",
        dest="z_mode",
        choices=["zero", "max_rho", "min_rho"],
        default=None,
        help="override assignment tie-break mode",
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="erpsim",
        description="Reach-avoid pursuit games: certificates, allocation, simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_check = sub.add_parser("check", help="evaluate winning certificates")
    _add_common(p_check)
    p_run = sub.add_parser("run", help="simulate and write artifacts")
    _add_common(p_run)
    p_run.add_argument("--out", default="out", help="output directory")
    p_alloc = sub.add_parser("allocate", help="dump game graph and assignment")
    _add_common(p_alloc)
    args = parser.parse_args(argv)
    try:
        if args.command == "check":
            return cmd_check(args)
        if args.command == "run":
            return cmd_run(args)
        return cmd_allocate(args)
    except ErpsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
