"""Solar array output and the power actually available to the thruster.

The array model is the standard heliocentric fit: an inverse-square baseline
times a rational correction in distance, times exponential-in-time cell
degradation. The fit coefficients make the correction exactly 1 at 1 au, so the
baseline power P_BL is by construction the beginning-of-life output at Earth.

Downstream electronics clip what the thruster can draw: above the system +
processing ceiling the duty-cycled maximum is available, below it only what the
array produces net of housekeeping. That piecewise law has a kink, so a smooth
companion based on an L2-regularized step replaces it inside the optimizer;
the two agree away from the corner and the smooth one is everywhere at or
above the exact one by at most O(rho).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ad
from .errors import ConfigurationError

DISTANCE_FIT = (1.1063, 0.1495, -0.299, -0.0432, 0.0)
"""Rational-fit coefficients (d1..d5) for array output vs heliocentric distance."""


@dataclass(frozen=True)
class PowerPlantConfig:
    """Solar array and power-processing parameters. Powers in watts.

    p_bl_bounds  optimizer box for the baseline (1 au, beginning-of-life) power
    p_max        power-processing ceiling deliverable to the thruster
    p_sys        constant housekeeping draw
    duty_cycle   fraction of delivered power usable for thrusting
    sigma        per-year array degradation fraction
    d            distance-fit coefficients d1..d5
    """

    p_bl_bounds: tuple[float, float]
    p_max: float
    p_sys: float
    duty_cycle: float
    sigma: float
    d: tuple[float, float, float, float, float] = DISTANCE_FIT

    def __post_init__(self):
        lo, hi = self.p_bl_bounds
        if not (0.0 < lo < hi):
            raise ConfigurationError(
                f"baseline power bounds must satisfy 0 < lo < hi, got {self.p_bl_bounds}"
            )
        if self.p_max <= 0.0:
            raise ConfigurationError(f"p_max must be positive, got {self.p_max}")
        if self.p_sys < 0.0:
            raise ConfigurationError(f"p_sys must be nonnegative, got {self.p_sys}")
        if not 0.0 < self.duty_cycle <= 1.0:
            raise ConfigurationError(
                f"duty_cycle must lie in (0, 1], got {self.duty_cycle}"
            )
        if not 0.0 <= self.sigma < 1.0:
            raise ConfigurationError(f"sigma must lie in [0, 1), got {self.sigma}")
        if len(self.d) != 5:
            raise ConfigurationError("distance fit needs exactly 5 coefficients")


@dataclass(frozen=True)
class SmoothingParams:
    """Continuation knobs, both dimensionless.

    rho_p scales with the processing ceiling (the power smoother itself works
    in watts; callers multiply by p_max). rho_e is already normalized because
    mode-switch arguments are divided by the largest selected mode power.
    """

    rho_p: float
    rho_e: float

    def __post_init__(self):
        if self.rho_p <= 0.0 or self.rho_e <= 0.0:
            raise ConfigurationError(
                f"smoothing widths must be positive, got ({self.rho_p}, {self.rho_e})"
            )


def solar_array_power(p_bl, r, t_years, cfg: PowerPlantConfig):
    """Array output [W] at heliocentric distance r [canonical] and age t [yr].

    Generic over floats, arrays, and duals in p_bl and r; t_years is plain.
    """
    d1, d2, d3, d4, d5 = cfg.d
    num = d1 + d2 / r + d3 / (r * r)
    den = 1.0 + d4 * r + d5 * (r * r)
    den_val = ad.value(den)
    if np.any(np.asarray(den_val) <= 0.0):
        raise ValueError("distance-fit denominator is nonpositive at this radius")
    decay = np.power(1.0 - cfg.sigma, t_years)
    return (p_bl / (r * r)) * (num / den) * decay


def available_power_piecewise(p_sa, cfg: PowerPlantConfig):
    """Exact delivered-power law [W]: validation-side arbiter, has a kink."""
    p_sa = np.asarray(p_sa, dtype=float)
    full = cfg.duty_cycle * cfg.p_max
    starved = cfg.duty_cycle * (p_sa - cfg.p_sys)
    return np.where(p_sa >= cfg.p_sys + cfg.p_max, full, starved)


def available_power_smooth(p_sa, cfg: PowerPlantConfig, rho_p_watts: float):
    """Smooth companion of the piecewise law; rho here is in watts.

    chi ramps 0 -> 1 across a band of width O(rho) around the ceiling knee and
    blends the two branches. Generic over arrays and duals.
    """
    if rho_p_watts <= 0.0:
        raise ValueError(f"smoothing width must be positive, got {rho_p_watts}")
    gap = p_sa - (cfg.p_sys + cfg.p_max)
    chi = 0.5 * (1.0 + gap / ad.sqrt(gap * gap + rho_p_watts * rho_p_watts))
    starved = p_sa - cfg.p_sys
    return cfg.duty_cycle * (chi * cfg.p_max + (1.0 - chi) * starved)
