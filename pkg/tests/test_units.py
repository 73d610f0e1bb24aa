import math

import pytest

from sepopt.units import AU_M, DAY_S, JULIAN_YEAR_S, MU_SUN_M3_S2, CanonicalUnits


def test_sun_au_time_unit_matches_definition():
    u = CanonicalUnits.sun_au()
    assert u.length_unit == AU_M
    assert u.time_unit == pytest.approx(math.sqrt(AU_M**3 / MU_SUN_M3_S2), rel=0.0)
    # frozen value; one canonical time is about 58.13 days
    assert u.time_unit == pytest.approx(5022642.891366037, abs=1e-6)


def test_circular_orbit_at_1au_has_unit_speed():
    u = CanonicalUnits.sun_au()
    v_circ = math.sqrt(MU_SUN_M3_S2 / AU_M)  # m/s
    assert v_circ / u.velocity_unit == pytest.approx(1.0, rel=1e-12)
    assert u.velocity_unit == pytest.approx(29784.69, rel=1e-6)


def test_accel_round_trip():
    u = CanonicalUnits.sun_au()
    a = 2.37e-4  # m/s^2, a typical SEP acceleration
    assert u.accel_from_si(a) * u.accel_unit == pytest.approx(a, rel=1e-15)


def test_mdot_conversion_uses_mass_unit():
    u1 = CanonicalUnits.sun_au()
    u2 = CanonicalUnits.sun_au(mass_unit=3000.0)
    mdot = 17.8e-6  # kg/s
    assert u1.mdot_from_si(mdot) == pytest.approx(mdot * u1.time_unit)
    assert u2.mdot_from_si(mdot) == pytest.approx(u1.mdot_from_si(mdot) / 3000.0)


def test_time_conversions_are_inverses():
    u = CanonicalUnits.sun_au()
    assert u.days_from_time(u.time_from_days(1770.0)) == pytest.approx(1770.0)
    t = u.time_from_days(365.25)
    assert u.years_from_time(t) == pytest.approx(DAY_S * 365.25 / JULIAN_YEAR_S)


def test_invalid_units_rejected():
    with pytest.raises(ValueError):
        CanonicalUnits(length_unit=-1.0, time_unit=1.0)
    with pytest.raises(ValueError):
        CanonicalUnits(length_unit=1.0, time_unit=1.0, mu=2.0)
