"""Command line entry points.

Verbs: solve (one mode subset end to end), compare (sweep the configured mode
subsets), validate (audit a written solution directory), emit-guess (write the
cold-start point for inspection). Exit codes: 0 success, 2 configuration or
parse problem, 3 continuation abort, 4 validation failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .artifacts import read_solution_dir, write_comparison, write_solution_dir
from .config import RunConfig, load_config
from .continuation import (
    ContinuationSchedule,
    MissionSolution,
    compare_modesets,
    initial_guess,
    run_continuation,
)
from .errors import ConfigurationError, ContinuationAbortError, IntegrationFailureError, ThrottleTableError
from .power import SmoothingParams
from .thruster import build_mode_set
from .transcription import objective as point_objective
from .validation import audit

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3
EXIT_VALIDATION = 4


@dataclass
class RunManifest:
    """One CLI invocation's worth of decisions."""

    config: str | None = None
    table: str | None = None
    out: str = "sepopt_out"
    nodes: int | None = None
    schedule: ContinuationSchedule | None = None
    max_minutes: float | None = None
    modes: list | None = None
    verbose: bool = False


def _load(manifest: RunManifest) -> RunConfig:
    rc = load_config(
        path=manifest.config,
        table_path=manifest.table,
        nodes=manifest.nodes,
        schedule_override=manifest.schedule,
    )
    if manifest.modes:
        rc.mode_indices = list(manifest.modes)
    return rc


def run(manifest: RunManifest) -> int:
    """Solve one mission per the manifest and write the artifact set."""
    rc = _load(manifest)
    ms = build_mode_set(rc.table, rc.mode_indices)
    budget_s = manifest.max_minutes * 60.0 if manifest.max_minutes else None
    try:
        solution, trace = run_continuation(
            rc.mission, ms, rc.schedule, options=rc.solver,
            time_budget_s=budget_s, log=True if manifest.verbose else None,
        )
    except ContinuationAbortError as exc:
        print(f"continuation aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    report = audit(solution.point, rc.mission, ms, solution.rho_e)
    write_solution_dir(manifest.out, rc.mission, ms, solution, trace, report)
    print(f"wrote {Path(manifest.out).resolve()}")
    _print_summary(solution, rc)
    if report.verdict != "pass":
        print(f"validation verdict: fail ({report.as_dict()['checks']})", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _print_summary(solution: MissionSolution, rc: RunConfig):
    b = solution.breakdown(rc.mission)
    print(
        f"P_BL = {solution.p_bl:.1f} W, useful mass = {b.m_useful:.2f} kg, "
        f"final mass = {b.m_final:.2f} kg, "
        f"rho = ({solution.rho_p:.3e}, {solution.rho_e:.3e}), "
        f"target reached: {solution.reached_target}"
    )


def run_compare(manifest: RunManifest) -> int:
    rc = _load(manifest)
    if not rc.compare_subsets:
        print("config has no compare.subsets section", file=sys.stderr)
        return EXIT_CONFIG
    budget_s = manifest.max_minutes * 60.0 if manifest.max_minutes else None
    try:
        rows = compare_modesets(
            rc.mission, rc.table, rc.compare_subsets, rc.schedule,
            options=rc.solver, time_budget_s=budget_s,
            log=True if manifest.verbose else None,
        )
    except ContinuationAbortError as exc:
        print(f"continuation aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    out = Path(manifest.out)
    for row in rows:
        ms = build_mode_set(rc.table, list(row.modes))
        sub = out / ("modes_" + "_".join(str(m) for m in row.modes))
        write_solution_dir(sub, rc.mission, ms, row.solution, row.trace, row.report)
    write_comparison(out, rows, rc.mission)
    print(f"wrote {out.resolve()}")
    for row in rows:
        b = row.solution.breakdown(rc.mission)
        print(
            f"modes {list(row.modes)}: useful mass {b.m_useful:.2f} kg, "
            f"P_BL {row.solution.p_bl:.1f} W, verdict {row.report.verdict}"
        )
    return EXIT_OK


def run_validate(manifest: RunManifest, solution_dir: str) -> int:
    rc = _load(manifest)
    point, meta = read_solution_dir(solution_dir)
    modes = meta.get("modes", rc.mode_indices)
    ms = build_mode_set(rc.table, modes)
    if meta.get("n_nodes") != rc.mission.n_nodes:
        rc.mission.n_nodes = int(meta["n_nodes"])
        rc.mission.validate()
    try:
        report = audit(point, rc.mission, ms, float(meta["rho_e"]))
    except IntegrationFailureError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    payload = report.as_dict()
    Path(solution_dir, "validation.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )
    print(f"verdict: {report.verdict}")
    for name, ok in payload["checks"].items():
        print(f"  {name}: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if report.verdict == "pass" else EXIT_VALIDATION


def run_emit_guess(manifest: RunManifest) -> int:
    rc = _load(manifest)
    ms = build_mode_set(rc.table, rc.mode_indices)
    smoothing = SmoothingParams(*rc.schedule.steps[0])
    point = initial_guess(rc.mission, ms, smoothing)
    solution = MissionSolution(
        point=point,
        objective=point_objective(point, rc.mission),
        rho_p=smoothing.rho_p,
        rho_e=smoothing.rho_e,
        reached_target=False,
        kkt_residual=float("nan"),
        constraint_violation=float("nan"),
        multipliers=(None, None),
        status="guess",
    )
    write_solution_dir(manifest.out, rc.mission, ms, solution)
    print(f"wrote {Path(manifest.out).resolve()}")
    return EXIT_OK


def _parse_schedule(text: str) -> ContinuationSchedule:
    parts = [float(p) for p in text.split(",")]
    if len(parts) not in (4, 5):
        raise ConfigurationError(
            "--schedule wants rho_p_start,rho_e_start,rho_p_target,rho_e_target[,factor]"
        )
    factor = parts[4] if len(parts) == 5 else 0.5
    return ContinuationSchedule.geometric(
        start=(parts[0], parts[1]), target=(parts[2], parts[3]), factor=factor
    )


def _add_common(p: argparse.ArgumentParser, with_out=True):
    p.add_argument("--config", help="mission YAML (default: bundled Earth -> 67P)")
    p.add_argument("--table", help="throttle table CSV (default: bundled SPT-140)")
    if with_out:
        p.add_argument("--out", default="sepopt_out", help="output directory")
    p.add_argument("--nodes", type=int, help="override the node count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sepopt",
        description="Co-optimize solar array size, thruster modes, and a "
        "low-thrust trajectory by smoothed direct transcription.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve the configured mission")
    _add_common(p_solve)
    p_solve.add_argument("--modes", help="comma-separated mode indices, e.g. 3,20")
    p_solve.add_argument("--schedule", help="rho_p0,rho_e0,rho_pT,rho_eT[,factor]")
    p_solve.add_argument("--max-minutes", type=float, help="continuation time budget")
    p_solve.add_argument("--verbose", action="store_true", help="log each step")

    p_cmp = sub.add_parser("compare", help="sweep the configured mode subsets")
    _add_common(p_cmp)
    p_cmp.add_argument("--schedule", help="rho_p0,rho_e0,rho_pT,rho_eT[,factor]")
    p_cmp.add_argument("--max-minutes", type=float, help="total time budget")
    p_cmp.add_argument("--verbose", action="store_true", help="log each step")

    p_val = sub.add_parser("validate", help="audit a written solution directory")
    _add_common(p_val, with_out=False)
    p_val.add_argument("--solution", required=True, help="solution directory to audit")

    p_guess = sub.add_parser("emit-guess", help="write the cold-start point")
    _add_common(p_guess)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = RunManifest(
            config=getattr(args, "config", None),
            table=getattr(args, "table", None),
            out=getattr(args, "out", "sepopt_out"),
            nodes=getattr(args, "nodes", None),
            schedule=_parse_schedule(args.schedule) if getattr(args, "schedule", None) else None,
            max_minutes=getattr(args, "max_minutes", None),
            modes=[int(m) for m in args.modes.split(",")] if getattr(args, "modes", None) else None,
            verbose=getattr(args, "verbose", False),
        )
        if args.command == "solve":
            return run(manifest)
        if args.command == "compare":
            return run_compare(manifest)
        if args.command == "validate":
            return run_validate(manifest, args.solution)
        if args.command == "emit-guess":
            return run_emit_guess(manifest)
        raise AssertionError(f"unhandled command {args.command}")
    except (ConfigurationError, ThrottleTableError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
