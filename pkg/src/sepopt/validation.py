"""Independent audit of a converged solution.

Everything here deliberately avoids the optimizer's machinery: mode selection
is the hard power-window test instead of sigmoids, available power is the
exact piecewise law instead of its smooth companion, and the dynamics are
re-propagated with an adaptive high-order integrator instead of the fixed-step
RK4 the defects used. Agreement between the two routes is evidence; reusing
one route twice would be bookkeeping.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import mee
from .errors import IntegrationFailureError
from .power import available_power_piecewise, solar_array_power
from .thruster import ModeSet, activation_vector
from .transcription import DecisionPoint, MissionConfig, time_grid

_THRUSTING_N = 1.0e-3
"""Blended thrust above this [N] counts a node as thrusting."""


@dataclass(frozen=True)
class ValidationThresholds:
    """Audit pass/fail gates. Boundary and steering are in canonical units
    (the mass condition normalized by wet mass); power in watts; ambiguity is
    1 - max activation at thrusting nodes. Repropagation error is reported
    but never gates the verdict (it measures discretization, not optimality).
    """

    boundary: float = 1.0e-5
    power_w: float = 1.0
    steering: float = 1.0e-8
    mode_ambiguity: float = 0.05


@dataclass
class ValidationReport:
    boundary_error: float
    power_violation_w: float
    steering_error: float
    mode_ambiguity: float
    reprop_state_error: float
    reprop_mass_error_kg: float
    checks: dict
    verdict: str
    thresholds: ValidationThresholds = field(default_factory=ValidationThresholds)

    def as_dict(self) -> dict:
        return {
            "boundary_error": self.boundary_error,
            "power_violation_w": self.power_violation_w,
            "steering_error": self.steering_error,
            "mode_ambiguity": self.mode_ambiguity,
            "reprop_state_error": self.reprop_state_error,
            "reprop_mass_error_kg": self.reprop_mass_error_kg,
            "checks": dict(self.checks),
            "verdict": self.verdict,
            "thresholds": {
                "boundary": self.thresholds.boundary,
                "power_w": self.thresholds.power_w,
                "steering": self.thresholds.steering,
                "mode_ambiguity": self.thresholds.mode_ambiguity,
            },
        }


def hard_mode_index(p_e: float, mode_set: ModeSet) -> int:
    """Window test: the highest-power mode whose threshold p_e clears.

    Returns -1 when p_e is below every selected mode (thrust off). With the
    coast row present the return is always a valid row index.
    """
    for i, p in enumerate(mode_set.p_sel):
        if p_e >= p:
            return i
    return -1


def repropagate(
    point: DecisionPoint, cfg: MissionConfig, mode_set: ModeSet
) -> np.ndarray:
    """Re-integrate each control interval with DOP853 under hard mode logic.

    Controls are zero-order-hold exactly as transcribed; only the integrator
    and the mode selection differ from the optimizer's model. Returns the
    (N, 7) node states of the re-propagated trajectory.
    """
    n = cfg.n_nodes
    t = time_grid(cfg)
    u = cfg.units
    acc_factor = u.time_unit**2 / u.length_unit
    mdot_factor = u.time_unit / u.mass_unit

    out = np.empty((n, 7))
    out[0] = point.states[0]
    for i in range(n - 1):
        idx = hard_mode_index(float(point.p_e[i]), mode_set)
        thrust = float(mode_set.t_sel[idx]) if idx >= 0 else 0.0
        mdot = float(mode_set.mdot_sel[idx]) if idx >= 0 else 0.0
        alpha = point.steering[i]

        def rate(_t, y):
            p, f, g, h, k, l, m = y
            acc = thrust * acc_factor / m
            dp, df, dg, dh, dk, dl = mee.gauss_rates(
                p, f, g, h, k, l, acc * alpha[0], acc * alpha[1], acc * alpha[2], u.mu
            )
            return (dp, df, dg, dh, dk, dl, -mdot * mdot_factor)

        sol = solve_ivp(
            rate,
            (t[i], t[i + 1]),
            out[i],
            method="DOP853",
            rtol=1.0e-10,
            atol=[1.0e-12] * 6 + [1.0e-9],
        )
        if not sol.success:
            raise IntegrationFailureError(
                f"reference integration failed on interval {i}: {sol.message}",
                interval=i,
            )
        out[i + 1] = sol.y[:, -1]
    return out


def audit(
    point: DecisionPoint,
    cfg: MissionConfig,
    mode_set: ModeSet,
    rho_e: float,
    thresholds: ValidationThresholds | None = None,
) -> ValidationReport:
    """Check a decision point against the exact (unsmoothed) problem."""
    th = thresholds or ValidationThresholds()
    n = cfg.n_nodes

    boundary = max(
        float(np.max(np.abs(point.states[0, :6] - cfg.x0))),
        float(np.max(np.abs(point.states[-1, :6] - cfg.xf))),
        abs(point.states[0, 6] - cfg.m0) / cfg.m0,
    )

    # each interval's command must fit the exact deliverable power at both of
    # its endpoint epochs; the node command is checked at its own epoch too
    t_years = cfg.units.years_from_time(time_grid(cfg))
    state_idx = np.concatenate([np.arange(n), np.arange(1, n)])
    pe_idx = np.concatenate([np.arange(n), np.arange(n - 1)])
    s = point.states[state_idx]
    radii = s[:, 0] / (1.0 + s[:, 1] * np.cos(s[:, 5]) + s[:, 2] * np.sin(s[:, 5]))
    p_sa = solar_array_power(point.p_bl, radii, t_years[state_idx], cfg.power)
    p_ava = available_power_piecewise(p_sa, cfg.power)
    power_violation = float(np.max(np.maximum(0.0, point.p_e[pe_idx] - p_ava)))

    steering = float(
        np.max(np.abs(np.einsum("ij,ij->i", point.steering, point.steering) - 1.0))
    )

    eta = activation_vector(point.p_e, mode_set, rho_e).eta
    blended = eta @ mode_set.t_sel
    thrusting = blended > _THRUSTING_N
    ambiguity = (
        float(np.max(1.0 - np.max(eta[thrusting], axis=1))) if np.any(thrusting) else 0.0
    )

    reprop = repropagate(point, cfg, mode_set)
    reprop_state = float(np.max(np.abs(reprop[-1, :6] - point.states[-1, :6])))
    reprop_mass = abs(reprop[-1, 6] - point.states[-1, 6])

    checks = {
        "boundary": boundary <= th.boundary,
        "power": power_violation <= th.power_w,
        "steering": steering <= th.steering,
        "mode_ambiguity": ambiguity <= th.mode_ambiguity,
    }
    return ValidationReport(
        boundary_error=boundary,
        power_violation_w=power_violation,
        steering_error=steering,
        mode_ambiguity=ambiguity,
        reprop_state_error=reprop_state,
        reprop_mass_error_kg=reprop_mass,
        checks=checks,
        verdict="pass" if all(checks.values()) else "fail",
        thresholds=th,
    )
