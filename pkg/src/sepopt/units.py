"""Canonical unit system for heliocentric trajectory work.

Lengths are measured in astronomical units and times in the unit that makes the
solar gravitational parameter exactly one; with that choice the equations of
motion carry no large constants and a circular orbit at 1 au has unit angular
rate. Mass stays in kilograms (the propellant bookkeeping is linear in mass, so
nothing is gained by rescaling it here; the transcription applies its own
column scaling).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

AU_M = 1.495978707e11
"""Astronomical unit [m]."""

MU_SUN_M3_S2 = 1.32712440018e20
"""Solar gravitational parameter [m^3/s^2]."""

G0_M_S2 = 9.80665
"""Standard gravity, used for Isp consistency checks [m/s^2]."""

DAY_S = 86400.0
JULIAN_YEAR_S = 365.25 * DAY_S


@dataclass(frozen=True)
class CanonicalUnits:
    """Conversion factors between SI and the canonical system.

    length_unit  meters per canonical length
    time_unit    seconds per canonical time
    mass_unit    kilograms per canonical mass
    mu           gravitational parameter in canonical units (exactly 1)
    """

    length_unit: float
    time_unit: float
    mass_unit: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if self.length_unit <= 0.0 or self.time_unit <= 0.0 or self.mass_unit <= 0.0:
            raise ValueError("unit scales must be positive")
        if self.mu != 1.0:
            raise ValueError("canonical gravitational parameter must be exactly 1")

    @classmethod
    def sun_au(cls, mass_unit: float = 1.0) -> "CanonicalUnits":
        """Heliocentric system: 1 au, mu_sun = 1."""
        time_unit = math.sqrt(AU_M**3 / MU_SUN_M3_S2)
        return cls(length_unit=AU_M, time_unit=time_unit, mass_unit=mass_unit)

    @property
    def velocity_unit(self) -> float:
        """Meters per second per canonical velocity."""
        return self.length_unit / self.time_unit

    @property
    def accel_unit(self) -> float:
        """Meters per second^2 per canonical acceleration."""
        return self.length_unit / self.time_unit**2

    def accel_from_si(self, a_m_s2: float) -> float:
        return a_m_s2 / self.accel_unit

    def mdot_from_si(self, mdot_kg_s: float) -> float:
        """Mass flow [kg/s] to canonical mass per canonical time."""
        return mdot_kg_s * self.time_unit / self.mass_unit

    def time_from_days(self, days: float) -> float:
        return days * DAY_S / self.time_unit

    def days_from_time(self, t: float) -> float:
        return t * self.time_unit / DAY_S

    def years_from_time(self, t: float) -> float:
        """Elapsed canonical time to Julian years (array degradation exponent)."""
        return t * self.time_unit / JULIAN_YEAR_S
