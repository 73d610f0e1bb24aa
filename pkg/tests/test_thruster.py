import io
from pathlib import Path

import numpy as np
import pytest

from sepopt.errors import ConfigurationError, ThrottleTableError
from sepopt.thruster import (
    ActivationVector,
    ThrottleMode,
    activation_vector,
    blended_output,
    build_mode_set,
    load_throttle_table,
)
from sepopt.validation import hard_mode_index

DATA = Path(__file__).resolve().parents[1] / "src" / "sepopt" / "data" / "spt140.csv"

HEADER = "mode,power_W,thrust_mN,mdot_mg_s,isp_s,efficiency\n"


def table_from(*rows):
    return load_throttle_table(io.StringIO(HEADER + "\n".join(rows)))


def test_bundled_table_parses_and_converts_units():
    table = load_throttle_table(DATA)
    assert len(table) == 21
    by_index = {m.index: m for m in table}
    m3 = by_index[3]
    assert m3.power == pytest.approx(4589.0)
    assert m3.thrust == pytest.approx(0.287)
    assert m3.mdot == pytest.approx(17.8e-6)
    assert m3.isp == pytest.approx(1647.0)
    m20 = by_index[20]
    assert (m20.power, m20.thrust, m20.mdot) == pytest.approx((3008.0, 0.177, 11.4e-6))


def test_loader_accepts_path_string_and_rejects_other_sources():
    assert load_throttle_table(str(DATA)) == load_throttle_table(DATA)
    with pytest.raises(TypeError):
        load_throttle_table(12345)


def test_parse_errors_point_at_the_offending_cell():
    with pytest.raises(ThrottleTableError, match="row 2, column thrust_mN"):
        table_from("1,4500,oops,17.0,1600,0.5")
    with pytest.raises(ThrottleTableError, match="row 3: expected 6 cells, got 5"):
        table_from("1,4500,280,17.5,1632,0.5", "2,4000,250,16.0,1594")
    with pytest.raises(ThrottleTableError, match="missing"):
        load_throttle_table(io.StringIO("mode,power_W,thrust_mN\n1,4500,280\n"))
    with pytest.raises(ThrottleTableError, match="empty"):
        load_throttle_table(io.StringIO("# only a comment\n"))
    with pytest.raises(ThrottleTableError, match="duplicate"):
        table_from("1,4500,280,17.5,1632,0.5", "1,4000,250,16.0,1594,0.5")


def test_sanity_ceilings_catch_unit_mistakes():
    # thrust entered in N instead of mN
    with pytest.raises(ThrottleTableError, match="thrust.*ceiling"):
        table_from("1,4500,280000,17.5,1632,0.5")
    with pytest.raises(ThrottleTableError, match="power.*ceiling"):
        table_from("1,4.5e6,280,17.5,1632,0.5")
    with pytest.raises(ThrottleTableError, match="mass flow.*ceiling"):
        table_from("1,4500,280,17500,1632,0.5")


def test_thrust_isp_mdot_consistency_is_enforced():
    # 280 mN at 17.5 mg/s implies Isp ~ 1632 s; a wildly different Isp is a typo
    with pytest.raises(ThrottleTableError, match="inconsistent"):
        table_from("1,4500,280,17.5,3000,0.5")
    ok = table_from("1,4500,280,17.5,1632,0.5")
    assert ok[0].isp == pytest.approx(1632.0)
    with pytest.raises(ThrottleTableError, match="negative"):
        ThrottleMode(index=1, power=100.0, thrust=-0.1, mdot=0.0, isp=0.0, efficiency=0.0)


def test_mode_set_orders_by_descending_power_with_coast_last():
    table = load_throttle_table(DATA)
    ms = build_mode_set(table, [20, 3])
    assert [m.power for m in ms.modes] == [4589.0, 3008.0, 0.0]
    assert ms.includes_coast
    assert ms.p_scale == 4589.0
    assert len(ms) == 3
    # coast row gets a fresh index so it can never shadow a table row
    assert ms.modes[-1].index == 22
    assert ms.modes[-1].thrust == 0.0

    bare = build_mode_set(table, [3], include_coast=False)
    assert len(bare) == 1
    np.testing.assert_allclose(bare.t_sel, [0.287])


def test_mode_set_selection_errors():
    table = load_throttle_table(DATA)
    with pytest.raises(ConfigurationError, match="empty"):
        build_mode_set(table, [])
    with pytest.raises(ConfigurationError, match="duplicates"):
        build_mode_set(table, [3, 3])
    with pytest.raises(ConfigurationError, match="not in table"):
        build_mode_set(table, [99])
    # equal powers leave the window test ambiguous
    twin = table_from(
        "1,4500,280,17.5,1632,0.5",
        "2,4500,280,17.5,1632,0.5",
    )
    with pytest.raises(ConfigurationError, match="strictly decreasing"):
        build_mode_set(twin, [1, 2])


def test_activation_is_a_smooth_partition_of_unity():
    table = load_throttle_table(DATA)
    ms = build_mode_set(table, [3, 20])
    rng = np.random.default_rng(7)
    p_e = rng.uniform(500.0, 6000.0, size=300)
    eta = activation_vector(p_e, ms, rho_e=1e-3).eta
    assert eta.shape == (300, 3)
    assert np.all(eta > 0.0) and np.all(eta < 1.0)
    # coast threshold is 0 W, so the three windows tile the command axis
    np.testing.assert_allclose(eta.sum(axis=1), 1.0, atol=1e-4)
    with pytest.raises(ValueError):
        activation_vector(4000.0, ms, rho_e=0.0)


def test_sharp_activation_recovers_the_hard_window_test():
    table = load_throttle_table(DATA)
    ms = build_mode_set(table, [3, 20, 21])
    rng = np.random.default_rng(11)
    p_e = rng.uniform(10.0, 5500.0, size=1000)
    eta = activation_vector(p_e, ms, rho_e=1e-9).eta
    soft = np.argmax(eta, axis=1)
    hard = np.array([hard_mode_index(p, ms) for p in p_e])
    np.testing.assert_array_equal(soft, hard)
    assert np.all(np.max(eta, axis=1) > 1.0 - 1e-6)


def test_activation_worked_example_at_target_width():
    # single flight mode at 4589 W plus coast, command sitting on the
    # duty-cycled plateau of a 4863 W processor
    table = load_throttle_table(DATA)
    ms = build_mode_set(table, [3])
    p_e = 0.95 * 4863.0
    eta = activation_vector(p_e, ms, rho_e=8.85e-4).eta
    x = (p_e - 4589.0) / 4589.0
    expect = 0.5 * (1.0 + x / np.hypot(x, 8.85e-4))
    assert eta[0] == pytest.approx(expect, rel=1e-12)
    assert eta[0] > 0.99
    # and far below the threshold the flight mode is off, coast takes over
    low = activation_vector(1000.0, ms, rho_e=8.85e-4).eta
    assert low[0] < 1e-6
    assert low[1] > 1.0 - 1e-4


def test_blended_output_shapes_and_length_check():
    table = load_throttle_table(DATA)
    ms = build_mode_set(table, [3, 20])
    t, md = blended_output(np.array([1.0, 0.0, 0.0]), ms)
    assert isinstance(t, float) and t == pytest.approx(0.287)
    assert md == pytest.approx(17.8e-6)

    act = activation_vector(np.array([4800.0, 3100.0, 10.0]), ms, rho_e=1e-6)
    tb, mb = blended_output(act, ms)
    assert tb.shape == (3,)
    np.testing.assert_allclose(tb, [0.287, 0.177, 0.0], atol=1e-6)
    np.testing.assert_allclose(mb, [17.8e-6, 11.4e-6, 0.0], atol=1e-9)

    with pytest.raises(ValueError, match="does not match"):
        blended_output(np.ones(5), ms)
    assert isinstance(act, ActivationVector)
