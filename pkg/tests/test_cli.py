import json

import numpy as np
import pytest

import sepopt.cli as cli
from sepopt.artifacts import read_solution_dir
from sepopt.config import load_config
from sepopt.continuation import (
    ComparisonRow,
    ContinuationTrace,
    MissionSolution,
    StepRecord,
)
from sepopt.errors import ContinuationAbortError
from sepopt.thruster import build_mode_set
from sepopt.transcription import DecisionPoint
from sepopt.validation import audit


def passing_point(cfg):
    """Coasting point whose endpoints match the mission boundary exactly, so
    the audit passes every gate (repropagation error is reported, not gated)."""
    n = cfg.n_nodes
    states = np.empty((n, 7))
    for j in range(6):
        states[:, j] = np.linspace(cfg.x0[j], cfg.xf[j], n)
    states[:, 6] = cfg.m0
    return DecisionPoint(
        states=states,
        steering=np.tile([0.0, 1.0, 0.0], (n, 1)),
        p_e=np.zeros(n),
        p_bl=17000.0,
    )


def fake_solution(cfg):
    return MissionSolution(
        point=passing_point(cfg),
        objective=-800.0,
        rho_p=8.85e-4,
        rho_e=8.85e-4,
        reached_target=True,
        kkt_residual=5e-6,
        constraint_violation=3e-9,
        multipliers=(None, None),
        status="converged",
    )


def fake_trace():
    trace = ContinuationTrace()
    trace.append(
        StepRecord(
            step=1, rho_p=0.1, rho_e=0.1, objective=-700.0, feasibility=1e-8,
            kkt=1e-6, iterations=7, inner_evals=120, p_bl=17000.0,
            backed_off=False, converged=True, wall_time=1.25,
        )
    )
    return trace


ARTIFACTS = [
    "solution.csv", "solution.json", "trajectory.csv", "thrust.csv",
    "power.csv", "activation.csv", "mass.csv",
]


def test_emit_guess_writes_artifacts(tmp_path):
    out = tmp_path / "guess"
    assert cli.main(["emit-guess", "--out", str(out), "--nodes", "15"]) == 0
    for name in ARTIFACTS:
        assert (out / name).exists(), name
    assert not (out / "trace.csv").exists()
    meta = json.loads((out / "solution.json").read_text())
    assert meta["status"] == "guess"
    assert meta["n_nodes"] == 15
    assert meta["modes"] == [3]


def test_emit_guess_reruns_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["emit-guess", "--out", str(a), "--nodes", "12"]) == 0
    assert cli.main(["emit-guess", "--out", str(b), "--nodes", "12"]) == 0
    for name in ARTIFACTS:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_solution_dir_round_trip(tmp_path):
    out = tmp_path / "guess"
    cli.main(["emit-guess", "--out", str(out), "--nodes", "12"])
    point, meta = read_solution_dir(out)
    assert point.states.shape == (12, 7)
    assert point.p_bl == meta["p_bl_w"]
    norms = np.linalg.norm(point.steering, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-15)


def test_solve_writes_artifacts_and_passes(tmp_path, monkeypatch, capsys):
    def scripted(cfg_arg, ms, schedule, **kwargs):
        return fake_solution(cfg_arg), fake_trace()

    monkeypatch.setattr(cli, "run_continuation", scripted)
    out = tmp_path / "run"
    code = cli.main(["solve", "--out", str(out), "--nodes", "12"])
    assert code == 0
    for name in ARTIFACTS + ["trace.csv", "validation.json"]:
        assert (out / name).exists(), name
    text = capsys.readouterr().out
    assert "useful mass" in text and "target reached: True" in text
    verdict = json.loads((out / "validation.json").read_text())
    assert verdict["verdict"] == "pass"
    trace_lines = (out / "trace.csv").read_text().strip().splitlines()
    assert len(trace_lines) == 2
    assert "wall" not in trace_lines[0]


def test_solve_exit_codes(tmp_path, monkeypatch):
    def aborts(*args, **kwargs):
        raise ContinuationAbortError("no continuation step converged")

    monkeypatch.setattr(cli, "run_continuation", aborts)
    assert cli.main(["solve", "--out", str(tmp_path / "x")]) == cli.EXIT_ABORT

    assert (
        cli.main(["solve", "--config", str(tmp_path / "missing.yaml")])
        == cli.EXIT_CONFIG
    )
    assert cli.main(["solve", "--schedule", "0.1,0.1"]) == cli.EXIT_CONFIG


def test_validate_subcommand(tmp_path, monkeypatch):
    def scripted(cfg_arg, ms, schedule, **kwargs):
        return fake_solution(cfg_arg), fake_trace()

    monkeypatch.setattr(cli, "run_continuation", scripted)
    out = tmp_path / "run"
    cli.main(["solve", "--out", str(out), "--nodes", "12"])
    assert cli.main(["validate", "--solution", str(out)]) == 0

    # guess misses the rendezvous: the audit must say so
    gout = tmp_path / "guess"
    cli.main(["emit-guess", "--out", str(gout), "--nodes", "12"])
    assert cli.main(["validate", "--solution", str(gout)]) == cli.EXIT_VALIDATION
    verdict = json.loads((gout / "validation.json").read_text())
    assert verdict["verdict"] == "fail"
    assert not verdict["checks"]["boundary"]


def test_compare_subcommand(tmp_path, monkeypatch, capsys):
    rc = load_config(nodes=12)

    def scripted(cfg_arg, table, subsets, schedule, **kwargs):
        rows = []
        for subset in subsets:
            ms = build_mode_set(table, subset)
            sol = fake_solution(cfg_arg)
            rows.append(
                ComparisonRow(
                    modes=tuple(subset), solution=sol, trace=fake_trace(),
                    report=audit(sol.point, cfg_arg, ms, sol.rho_e),
                )
            )
        return rows

    monkeypatch.setattr(cli, "compare_modesets", scripted)
    out = tmp_path / "cmp"
    assert cli.main(["compare", "--out", str(out), "--nodes", "12"]) == 0
    table = (out / "compare.csv").read_text().strip().splitlines()
    assert len(table) == 3  # header + the two configured subsets
    assert table[0].startswith("n_modes,modes,m_useful_kg")
    assert (out / "modes_3" / "solution.json").exists()
    assert (out / "modes_3_20" / "solution.json").exists()
    assert "modes [3]" in capsys.readouterr().out


def test_compare_requires_subsets(tmp_path):
    bare = tmp_path / "bare.yaml"
    bare.write_text(
        """
mission:
  x0: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
  xf: [2.0, 0.1, 0.1, 0.0, 0.0, 12.0]
  m0_kg: 3000.0
  tof_days: 1770.0
power:
  p_bl_bounds_W: [10000.0, 30000.0]
  p_max_W: 4863.0
  p_sys_W: 590.0
  duty_cycle: 0.95
  sigma_per_year: 0.02
thruster:
  modes: [3]
"""
    )
    assert cli.main(["compare", "--config", str(bare)]) == cli.EXIT_CONFIG


def test_modes_flag_overrides_config(tmp_path, monkeypatch):
    seen = {}

    def scripted(cfg_arg, ms, schedule, **kwargs):
        seen["n_modes"] = len(ms)
        return fake_solution(cfg_arg), fake_trace()

    monkeypatch.setattr(cli, "run_continuation", scripted)
    out = tmp_path / "run"
    code = cli.main(
        ["solve", "--out", str(out), "--nodes", "12", "--modes", "3,20"]
    )
    assert code == 0
    assert seen["n_modes"] == 3  # two throttle modes plus the coast row
    meta = json.loads((out / "solution.json").read_text())
    assert meta["modes"] == [3, 20]
    header = (out / "activation.csv").read_text().splitlines()[0]
    assert header == "t_days,eta_mode3,eta_mode20,eta_coast"
