import textwrap

import numpy as np
import pytest

from sepopt.config import (
    default_config_path,
    default_table_path,
    load_config,
)
from sepopt.continuation import ContinuationSchedule
from sepopt.errors import ConfigurationError

MINIMAL = textwrap.dedent(
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


def write(tmp_path, text, name="run.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_bundled_defaults_load():
    rc = load_config()
    m = rc.mission
    assert m.n_nodes == 100
    assert m.m0 == 3000.0
    assert m.tof_days == 1770.0
    assert m.power.p_max == 4863.0
    assert m.budget.gamma1 == 0.01 and m.budget.gamma2 == 0.015
    assert len(rc.table) == 21
    assert rc.mode_indices == [3]
    assert rc.schedule.steps[0] == (0.1, 0.1)
    assert rc.schedule.target == (8.85e-4, 8.85e-4)
    assert rc.compare_subsets == [[3], [3, 20]]
    assert default_config_path().exists()
    assert default_table_path().exists()


def test_nodes_override_wins():
    assert load_config(nodes=17).mission.n_nodes == 17


def test_minimal_file_fills_defaults(tmp_path):
    rc = load_config(write(tmp_path, MINIMAL))
    assert rc.mission.n_nodes == 100  # omitted key falls back
    assert rc.mission.budget.alpha_tank == 0.1
    assert rc.schedule.steps[0] == (0.1, 0.1)
    assert rc.compare_subsets == []
    assert rc.solver.tol_constraint == 1e-7
    np.testing.assert_array_equal(rc.mission.x0, [1, 0, 0, 0, 0, 0])


def test_explicit_steps_schedule(tmp_path):
    text = MINIMAL + textwrap.dedent(
        """
        continuation:
          steps:
            - [0.05, 0.05]
            - [0.01, 0.01]
          backoff_factor: 0.3
        """
    )
    rc = load_config(write(tmp_path, text))
    assert rc.schedule.steps == ((0.05, 0.05), (0.01, 0.01))
    assert rc.schedule.backoff_factor == 0.3


def test_schedule_override_argument(tmp_path):
    override = ContinuationSchedule(steps=((0.02, 0.02),))
    rc = load_config(write(tmp_path, MINIMAL), schedule_override=override)
    assert rc.schedule is override


def test_solver_section_round_trip(tmp_path):
    text = MINIMAL + textwrap.dedent(
        """
        solver:
          tol_kkt: 1.0e-6
          max_iterations: 10
        """
    )
    rc = load_config(write(tmp_path, text))
    assert rc.solver.tol_kkt == 1e-6
    assert rc.solver.max_iterations == 10
    assert rc.solver.penalty_growth == 4.0


def test_unknown_section_rejected(tmp_path):
    with pytest.raises(ConfigurationError, match="unknown config sections.*extras"):
        load_config(write(tmp_path, MINIMAL + "\nextras:\n  a: 1\n"))


def test_unknown_solver_option_rejected(tmp_path):
    text = MINIMAL + "\nsolver:\n  tol_primal: 1.0e-6\n"
    with pytest.raises(ConfigurationError, match="unknown solver options.*tol_primal"):
        load_config(write(tmp_path, text))


def test_missing_key_diagnostics(tmp_path):
    text = MINIMAL.replace("  m0_kg: 3000.0\n", "")
    with pytest.raises(ConfigurationError, match=r"missing key mission\.m0_kg"):
        load_config(write(tmp_path, text))
    text = MINIMAL.replace("  p_max_W: 4863.0\n", "")
    with pytest.raises(ConfigurationError, match=r"missing key power\.p_max_W"):
        load_config(write(tmp_path, text))


def test_non_numeric_entry_diagnostics(tmp_path):
    text = MINIMAL.replace("m0_kg: 3000.0", "m0_kg: heavy")
    with pytest.raises(ConfigurationError, match=r"mission\.m0_kg must be a number"):
        load_config(write(tmp_path, text))
    text = MINIMAL.replace("xf: [2.0, 0.1, 0.1, 0.0, 0.0, 12.0]", "xf: [2.0, fast]")
    with pytest.raises(ConfigurationError, match=r"mission\.xf"):
        load_config(write(tmp_path, text))


def test_wrong_length_state_rejected(tmp_path):
    text = MINIMAL.replace(
        "x0: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]", "x0: [1.0, 0.0, 0.0]"
    )
    with pytest.raises(ConfigurationError, match="must have 6 entries"):
        load_config(write(tmp_path, text))


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(ConfigurationError, match="cannot read config"):
        load_config(tmp_path / "absent.yaml")
    with pytest.raises(ConfigurationError, match="cannot parse config"):
        load_config(write(tmp_path, "mission: [unclosed\n"))
    with pytest.raises(ConfigurationError, match="not a mapping"):
        load_config(write(tmp_path, "- just\n- a list\n"))


def test_table_path_override(tmp_path):
    table = tmp_path / "tiny.csv"
    table.write_text(
        "mode,power_W,thrust_mN,mdot_mg_s,isp_s,efficiency\n"
        "1,3000.0,177.0,11.4,1579.0,0.47\n"
    )
    rc = load_config(write(tmp_path, MINIMAL), table_path=table)
    assert len(rc.table) == 1
    assert rc.table[0].power == 3000.0


def test_bounds_section(tmp_path):
    text = MINIMAL + textwrap.dedent(
        """
        bounds:
          p: [0.1, 8.0]
          mass_lo_kg: 50.0
        """
    )
    rc = load_config(write(tmp_path, text))
    assert rc.mission.bounds.p == (0.1, 8.0)
    assert rc.mission.bounds.mass_lo == 50.0
    assert rc.mission.bounds.fghk == 1.0  # untouched default
