"""Solution artifact files: plot-ready CSV series plus JSON summaries.

Every series is written at all N nodes (coast arcs included) in reporting
units: days, kilograms, watts, millinewtons, au. Floats are serialized with
shortest round-trip repr so identical runs produce byte-identical files.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import mee
from .continuation import ContinuationTrace, MissionSolution
from .power import available_power_piecewise, solar_array_power
from .thruster import ModeSet, activation_vector
from .transcription import DecisionPoint, MissionConfig, mass_breakdown, time_grid
from .validation import ValidationReport, hard_mode_index


def _write_csv(path: Path, header: list, columns: list):
    rows = len(columns[0])
    lines = [",".join(header)]
    for i in range(rows):
        lines.append(",".join(repr(float(col[i])) for col in columns))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_solution_dir(
    out_dir,
    cfg: MissionConfig,
    mode_set: ModeSet,
    solution: MissionSolution,
    trace: ContinuationTrace | None = None,
    report: ValidationReport | None = None,
) -> Path:
    """Write the full artifact set for one solved (or guessed) mission."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    point = solution.point
    n = cfg.n_nodes

    t_days = np.array([cfg.units.days_from_time(t) for t in time_grid(cfg)])
    states = point.states

    positions = np.empty((n, 3))
    for j in range(n):
        cart = mee.mee_to_cartesian(mee.MeeState.from_array(states[j, :6]), cfg.units)
        positions[j] = cart.position

    eta = activation_vector(point.p_e, mode_set, solution.rho_e).eta
    thrust_mn = (eta @ mode_set.t_sel) * 1.0e3
    p_blend = eta @ mode_set.p_sel
    # thrust of the discretely selected mode (the flyable command), alongside
    # the smooth blend the optimizer actually saw
    mode_idx = np.array([hard_mode_index(pe, mode_set) for pe in point.p_e])
    thrust_mode_mn = np.where(
        mode_idx >= 0, mode_set.t_sel[np.maximum(mode_idx, 0)] * 1.0e3, 0.0
    )

    radii = states[:, 0] / (
        1.0 + states[:, 1] * np.cos(states[:, 5]) + states[:, 2] * np.sin(states[:, 5])
    )
    t_years = cfg.units.years_from_time(time_grid(cfg))
    p_sa = solar_array_power(point.p_bl, radii, t_years, cfg.power)
    p_ava = available_power_piecewise(p_sa, cfg.power)

    _write_csv(
        out / "solution.csv",
        ["t_days", "p_au", "f", "g", "h", "k", "l_rad", "mass_kg",
         "alpha_r", "alpha_t", "alpha_n", "p_e_w"],
        [t_days, states[:, 0], states[:, 1], states[:, 2], states[:, 3],
         states[:, 4], states[:, 5], states[:, 6],
         point.steering[:, 0], point.steering[:, 1], point.steering[:, 2],
         point.p_e],
    )
    _write_csv(
        out / "trajectory.csv",
        ["t_days", "x_au", "y_au", "z_au"],
        [t_days, positions[:, 0], positions[:, 1], positions[:, 2]],
    )
    _write_csv(
        out / "thrust.csv",
        ["t_days", "thrust_mn", "thrust_mode_mn"],
        [t_days, thrust_mn, thrust_mode_mn],
    )
    _write_csv(
        out / "power.csv",
        ["t_days", "p_sa_w", "p_ava_w", "p_e_w", "p_blend_w"],
        [t_days, p_sa, p_ava, point.p_e, p_blend],
    )
    eta_names = [
        "eta_coast" if (mode_set.includes_coast and i == len(mode_set) - 1)
        else f"eta_mode{m.index}"
        for i, m in enumerate(mode_set.modes)
    ]
    _write_csv(
        out / "activation.csv",
        ["t_days"] + eta_names,
        [t_days] + [eta[:, i] for i in range(eta.shape[1])],
    )
    _write_csv(out / "mass.csv", ["t_days", "mass_kg"], [t_days, states[:, 6]])

    budget = mass_breakdown(point, cfg)
    meta = {
        "status": solution.status,
        "message": solution.message,
        "reached_target": solution.reached_target,
        "objective_kg": solution.objective,
        "p_bl_w": point.p_bl,
        "rho_p": solution.rho_p,
        "rho_e": solution.rho_e,
        "kkt_residual": solution.kkt_residual,
        "constraint_violation": solution.constraint_violation,
        "n_nodes": n,
        "modes": [m.index for m in mode_set.modes if m.power > 0.0],
        "tof_days": cfg.tof_days,
        "m0_kg": cfg.m0,
        "mass_budget": budget.as_dict(),
    }
    _write_json(out / "solution.json", meta)

    if trace is not None:
        # wall_time stays off the file so identical reruns are byte-identical
        header = ["step", "rho_p", "rho_e", "objective_kg", "feasibility",
                  "kkt", "iterations", "inner_evals", "p_bl_w", "backed_off",
                  "converged"]
        lines = [",".join(header)]
        for r in trace.records:
            lines.append(",".join([
                str(r.step), repr(float(r.rho_p)), repr(float(r.rho_e)),
                repr(float(r.objective)), repr(float(r.feasibility)),
                repr(float(r.kkt)), str(r.iterations), str(r.inner_evals),
                repr(float(r.p_bl)), str(int(r.backed_off)),
                str(int(r.converged)),
            ]))
        (out / "trace.csv").write_text("\n".join(lines) + "\n")

    if report is not None:
        _write_json(out / "validation.json", report.as_dict())
    return out


def read_solution_dir(solution_dir) -> tuple:
    """Reload (DecisionPoint, metadata) from a written artifact directory."""
    sol = Path(solution_dir)
    meta = json.loads((sol / "solution.json").read_text())
    lines = (sol / "solution.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    col = {name: data[:, i] for i, name in enumerate(header)}
    states = np.column_stack([
        col["p_au"], col["f"], col["g"], col["h"], col["k"], col["l_rad"], col["mass_kg"]
    ])
    steering = np.column_stack([col["alpha_r"], col["alpha_t"], col["alpha_n"]])
    point = DecisionPoint(
        states=states, steering=steering, p_e=col["p_e_w"], p_bl=float(meta["p_bl_w"])
    )
    return point, meta


def write_comparison(out_dir, rows, cfg: MissionConfig) -> Path:
    """Summary table across mode subsets; one CSV row per subset."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = ["n_modes", "modes", "m_useful_kg", "m_final_kg", "m_array_kg",
              "m_power_system_kg", "m_propulsion_kg", "p_bl_w", "rho_p", "rho_e",
              "reached_target", "verdict"]
    lines = [",".join(header)]
    for row in rows:
        sol = row.solution
        b = mass_breakdown(sol.point, cfg).as_dict()
        lines.append(",".join([
            str(len(row.modes)),
            "+".join(str(m) for m in row.modes),
            repr(float(b["m_useful_kg"])), repr(float(b["m_final_kg"])),
            repr(float(b["m_array_kg"])), repr(float(b["m_power_system_kg"])),
            repr(float(b["m_propulsion_kg"])), repr(float(sol.p_bl)),
            repr(float(sol.rho_p)), repr(float(sol.rho_e)),
            str(int(sol.reached_target)), row.report.verdict,
        ]))
    (out / "compare.csv").write_text("\n".join(lines) + "\n")
    return out / "compare.csv"
