import numpy as np
import pytest

from sepopt import ad
from sepopt.errors import ConfigurationError
from sepopt.power import (
    PowerPlantConfig,
    SmoothingParams,
    available_power_piecewise,
    available_power_smooth,
    solar_array_power,
)

CFG = PowerPlantConfig(
    p_bl_bounds=(10000.0, 30000.0),
    p_max=4863.0,
    p_sys=590.0,
    duty_cycle=0.95,
    sigma=0.02,
)


def test_distance_fit_is_exactly_one_at_1au():
    # numerator and denominator both equal 0.9568 at r = 1, so the baseline
    # power is by construction the beginning-of-life output at Earth
    d1, d2, d3, d4, d5 = CFG.d
    assert d1 + d2 + d3 == pytest.approx(0.9568, abs=1e-12)
    assert 1.0 + d4 + d5 == pytest.approx(0.9568, abs=1e-12)
    assert solar_array_power(16946.507, 1.0, 0.0, CFG) == pytest.approx(16946.507, rel=1e-14)


def test_array_output_decays_with_distance_and_age():
    p = solar_array_power(17000.0, np.array([1.0, 1.5, 2.5, 3.5]), 0.0, CFG)
    assert np.all(np.diff(p) < 0.0)
    aged = solar_array_power(17000.0, 1.0, 4.0, CFG)
    assert aged == pytest.approx(17000.0 * 0.98**4, rel=1e-14)


def test_distance_fit_pole_raises():
    with pytest.raises(ValueError):
        solar_array_power(17000.0, 25.0, 0.0, CFG)


def test_piecewise_law_plateau_and_starved_branches():
    # above the knee the duty-cycled ceiling is all the thruster can draw
    assert available_power_piecewise(16000.0, CFG) == pytest.approx(4619.85)
    assert available_power_piecewise(5453.0, CFG) == pytest.approx(4619.85)
    # below it only the array output net of housekeeping
    assert available_power_piecewise(3000.0, CFG) == pytest.approx(2289.5)
    assert available_power_piecewise(590.0, CFG) == pytest.approx(0.0)


def test_smooth_law_bounds_the_exact_one_from_above():
    rho = 10.0
    p_sa = np.linspace(500.0, 16000.0, 4001)
    exact = available_power_piecewise(p_sa, CFG)
    smooth = available_power_smooth(p_sa, CFG, rho)
    excess = smooth - exact
    assert np.all(excess >= -1e-9)
    assert np.max(excess) <= CFG.duty_cycle * rho  # O(rho) only near the knee
    far = np.abs(p_sa - (CFG.p_sys + CFG.p_max)) > 50 * rho
    assert np.max(excess[far]) < 0.01 * rho


def test_smooth_law_sharpens_to_the_piecewise_law():
    p_sa = np.array([2000.0, 5000.0, 5452.0, 5454.0, 9000.0])
    for rho in (100.0, 1.0, 1e-4):
        gap = np.max(
            np.abs(
                available_power_smooth(p_sa, CFG, rho)
                - available_power_piecewise(p_sa, CFG)
            )
        )
        assert gap <= CFG.duty_cycle * rho + 1e-9


def test_smooth_law_shape_and_differentiability_at_the_knee():
    rho = 5.0
    knee = CFG.p_sys + CFG.p_max
    # rises on the starved side, overshoots just past the knee, then decays
    # back down onto the plateau from above
    starved_side = available_power_smooth(np.linspace(5000.0, knee, 800), CFG, rho)
    assert np.all(np.diff(starved_side) > 0.0)
    beyond = available_power_smooth(np.linspace(knee + rho, 6000.0, 800), CFG, rho)
    assert np.all(np.diff(beyond) < 0.0)
    assert beyond[-1] == pytest.approx(CFG.duty_cycle * CFG.p_max, abs=0.05)

    def smooth_of(x):
        return available_power_smooth(x, CFG, rho)

    h = 1e-3
    left = (smooth_of(knee) - smooth_of(knee - h)) / h
    right = (smooth_of(knee + h) - smooth_of(knee)) / h
    assert left == pytest.approx(right, abs=1e-3)
    # the kinked law has a jump of duty_cycle in its slope at the same point
    assert (
        available_power_piecewise(knee + h, CFG) - available_power_piecewise(knee, CFG)
    ) / h == pytest.approx(0.0)


def test_smooth_law_derivative_matches_finite_differences():
    rho = 4.3
    for p_sa in (3000.0, 5400.0, 5453.0, 5500.0, 12000.0):
        x = ad.Dual.variable(float(p_sa), 0, 1)
        y = available_power_smooth(x, CFG, rho)
        h = 1e-2
        fd = (
            available_power_smooth(p_sa + h, CFG, rho)
            - available_power_smooth(p_sa - h, CFG, rho)
        ) / (2 * h)
        assert float(y.der[..., 0]) == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_solar_array_power_propagates_duals_in_p_bl():
    x = ad.Dual.variable(17000.0, 0, 1)
    y = solar_array_power(x, 1.7, 2.0, CFG)
    # output is linear in the baseline power
    assert float(y.der[..., 0]) == pytest.approx(float(y.val) / 17000.0, rel=1e-14)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        PowerPlantConfig((0.0, 1.0), 100.0, 0.0, 0.9, 0.02)
    with pytest.raises(ConfigurationError):
        PowerPlantConfig((1.0, 2.0), -5.0, 0.0, 0.9, 0.02)
    with pytest.raises(ConfigurationError):
        PowerPlantConfig((1.0, 2.0), 100.0, 0.0, 1.5, 0.02)
    with pytest.raises(ConfigurationError):
        PowerPlantConfig((1.0, 2.0), 100.0, 0.0, 0.9, 1.0)
    with pytest.raises(ConfigurationError):
        SmoothingParams(rho_p=0.0, rho_e=0.1)
    with pytest.raises(ValueError):
        available_power_smooth(5000.0, CFG, 0.0)
