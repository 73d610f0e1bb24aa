"""Direct transcription of the co-optimization problem into a smooth NLP.

Decision vector layout (N nodes):

    z = [X_1 .. X_N | u_1 .. u_N | P_BL]

with X_j = (p, f, g, h, k, l, m) and u_j = (alpha_r, alpha_t, alpha_n, P_E),
so n_vars = 11 N + 1. Dynamics are enforced by one classical RK4 step per
interval with the control held at its left-node value across all four stages:

    X_{i+1} - Phi(X_i, u_i; h) = 0

Equalities stack [defects | boundary | steering unit-norm]; inequalities limit
the commanded power by the smooth available power at both endpoints of the
interval it acts over. Thrust and mass flow follow from the commanded power
through the smooth mode activation, so the discrete throttle table never
introduces a nonsmooth term; the two smoothing widths come in as
:class:`~sepopt.power.SmoothingParams` and are driven to zero by continuation.

Rows and columns are scaled so the advertised tolerances mean the same thing
everywhere: mass-valued rows and the mass column in units of the wet mass,
power-valued rows and columns in units of the processing ceiling.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from . import ad, mee
from .errors import ConfigurationError
from .power import PowerPlantConfig, SmoothingParams, available_power_smooth, solar_array_power
from .thruster import ModeSet, _activation_terms
from .units import CanonicalUnits


@dataclass(frozen=True)
class MassBudgetConfig:
    """Spacecraft sizing coefficients.

    gamma1   solar array specific mass [kg/W of baseline power]
    gamma2   power-processing specific mass [kg/W of ceiling power]
    alpha_tank  tankage fraction added on top of propellant mass
    """

    gamma1: float = 0.01
    gamma2: float = 0.015
    alpha_tank: float = 0.1

    def __post_init__(self):
        if self.gamma1 < 0.0 or self.gamma2 < 0.0 or self.alpha_tank < 0.0:
            raise ConfigurationError("mass budget coefficients must be nonnegative")


@dataclass(frozen=True)
class StateBounds:
    """Box bounds on the state trajectory, canonical units and kg."""

    p: tuple[float, float] = (0.2, 5.0)
    fghk: float = 1.0
    # wide enough that a cold-start guess overshooting the arrival phase stays
    # inside the box, narrow enough to exclude whole extra revolutions
    l_pad: float = 2.0
    mass_lo: float = 100.0

    def __post_init__(self):
        if not (0.0 < self.p[0] < self.p[1]):
            raise ConfigurationError(f"p bounds must satisfy 0 < lo < hi, got {self.p}")
        if self.fghk <= 0.0 or self.l_pad <= 0.0 or self.mass_lo <= 0.0:
            raise ConfigurationError("state bounds must be positive")


@dataclass
class MissionConfig:
    """Everything that defines one trajectory instance."""

    x0: np.ndarray
    xf: np.ndarray
    m0: float
    tof_days: float
    n_nodes: int
    power: PowerPlantConfig
    budget: MassBudgetConfig = field(default_factory=MassBudgetConfig)
    bounds: StateBounds = field(default_factory=StateBounds)
    units: CanonicalUnits = field(default_factory=CanonicalUnits.sun_au)

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        self.xf = np.asarray(self.xf, dtype=float)
        self.validate()

    def validate(self):
        if self.x0.shape != (6,) or self.xf.shape != (6,):
            raise ConfigurationError("boundary states must be 6-element MEE vectors")
        if self.n_nodes < 3:
            raise ConfigurationError(f"n_nodes must be at least 3, got {self.n_nodes}")
        if self.tof_days <= 0.0:
            raise ConfigurationError(f"time of flight must be positive, got {self.tof_days}")
        if self.m0 <= self.bounds.mass_lo:
            raise ConfigurationError(
                f"wet mass {self.m0} must exceed the mass floor {self.bounds.mass_lo}"
            )
        for name, x in (("x0", self.x0), ("xf", self.xf)):
            state = mee.MeeState.from_array(x)  # raises on p <= 0
            mee.heliocentric_radius(state)  # raises on w <= 0
            if not self.bounds.p[0] <= state.p <= self.bounds.p[1]:
                raise ConfigurationError(
                    f"{name}.p = {state.p} outside the p box {self.bounds.p}"
                )
            if max(abs(state.f), abs(state.g), abs(state.h), abs(state.k)) > self.bounds.fghk:
                raise ConfigurationError(
                    f"{name} eccentricity/inclination elements exceed the box {self.bounds.fghk}"
                )

    @property
    def tof(self) -> float:
        """Time of flight in canonical units."""
        return self.units.time_from_days(self.tof_days)


@dataclass(frozen=True)
class DecisionLayout:
    """Index bookkeeping for the flat decision vector."""

    n_nodes: int

    @property
    def n_vars(self) -> int:
        return 11 * self.n_nodes + 1

    @property
    def controls_start(self) -> int:
        return 7 * self.n_nodes

    @property
    def p_bl_index(self) -> int:
        return 11 * self.n_nodes

    def state_slice(self, j: int) -> slice:
        return slice(7 * j, 7 * j + 7)

    def control_slice(self, j: int) -> slice:
        base = self.controls_start + 4 * j
        return slice(base, base + 4)

    def alpha_slice(self, j: int) -> slice:
        base = self.controls_start + 4 * j
        return slice(base, base + 3)

    def p_e_index(self, j: int) -> int:
        return self.controls_start + 4 * j + 3

    @property
    def n_defect(self) -> int:
        return 7 * (self.n_nodes - 1)

    @property
    def n_eq(self) -> int:
        return self.n_defect + 13 + self.n_nodes

    @property
    def n_ineq(self) -> int:
        return 2 * self.n_nodes - 1


@dataclass
class DecisionPoint:
    """Structured view of one decision vector."""

    states: np.ndarray  # (N, 7)
    steering: np.ndarray  # (N, 3)
    p_e: np.ndarray  # (N,)
    p_bl: float

    def flatten(self) -> np.ndarray:
        controls = np.column_stack([self.steering, self.p_e])
        return np.concatenate([self.states.ravel(), controls.ravel(), [self.p_bl]])

    @classmethod
    def unflatten(cls, z: np.ndarray, layout: DecisionLayout) -> "DecisionPoint":
        z = np.asarray(z, dtype=float)
        if z.shape != (layout.n_vars,):
            raise ValueError(f"expected {layout.n_vars} variables, got {z.shape}")
        n = layout.n_nodes
        states = z[: 7 * n].reshape(n, 7).copy()
        controls = z[7 * n : 11 * n].reshape(n, 4)
        return cls(
            states=states,
            steering=controls[:, :3].copy(),
            p_e=controls[:, 3].copy(),
            p_bl=float(z[layout.p_bl_index]),
        )


@dataclass(frozen=True)
class MassBreakdown:
    """Launch-mass bookkeeping in kg; m_useful is what the objective maximizes."""

    m_useful: float
    m_propellant: float
    m_array: float
    m_power_system: float
    m_propulsion: float
    m_final: float

    def as_dict(self) -> dict:
        return {
            "m_useful_kg": self.m_useful,
            "m_propellant_kg": self.m_propellant,
            "m_array_kg": self.m_array,
            "m_power_system_kg": self.m_power_system,
            "m_propulsion_kg": self.m_propulsion,
            "m_final_kg": self.m_final,
        }


@dataclass
class NlpProblem:
    """A smooth NLP in standard form.

    eq(z) = 0 and ineq(z) <= 0 return row-scaled residuals; Jacobians are
    scipy CSR with row scaling applied and physical (unscaled) columns. The
    objective and gradient are physical; obj_scale and var_scales tell the
    solver how to nondimensionalize internally. eval_all, when present, is a
    one-pass fast path returning (f, grad, ceq, jac_eq, cin, jac_in).
    """

    n_vars: int
    lower: np.ndarray
    upper: np.ndarray
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    eq: Callable[[np.ndarray], np.ndarray]
    eq_jac: Callable[[np.ndarray], sp.csr_matrix]
    n_eq: int
    ineq: Optional[Callable[[np.ndarray], np.ndarray]] = None
    ineq_jac: Optional[Callable[[np.ndarray], sp.csr_matrix]] = None
    n_ineq: int = 0
    var_scales: Optional[np.ndarray] = None
    obj_scale: float = 1.0
    eval_all: Optional[Callable[[np.ndarray], tuple]] = None
    row_labels: Optional[list] = None
    layout: Optional[DecisionLayout] = None


def time_grid(cfg: MissionConfig) -> np.ndarray:
    """Canonical node times, uniform over the time of flight."""
    return np.linspace(0.0, cfg.tof, cfg.n_nodes)


class _Transcription:
    """Precomputed arrays and evaluation kernels behind one NlpProblem."""

    def __init__(self, cfg: MissionConfig, mode_set: ModeSet, smoothing: SmoothingParams):
        self.cfg = cfg
        self.ms = mode_set
        self.layout = DecisionLayout(cfg.n_nodes)
        n = cfg.n_nodes

        self.t_nodes = time_grid(cfg)
        self.h = float(self.t_nodes[1] - self.t_nodes[0])
        self.t_years = cfg.units.years_from_time(self.t_nodes)

        self.rho_e = smoothing.rho_e
        self.rho_p_w = smoothing.rho_p * cfg.power.p_max

        # mode data as plain floats; zero-coefficient terms are skipped in the
        # rate kernel so the coast row costs nothing
        self.p_sel = [float(p) for p in mode_set.p_sel]
        self.t_sel = [float(t) for t in mode_set.t_sel]
        self.mdot_sel = [float(m) for m in mode_set.mdot_sel]
        self.p_scale = mode_set.p_scale

        u = cfg.units
        self.acc_factor = u.time_unit**2 / u.length_unit  # N/kg -> canonical
        self.mdot_factor = u.time_unit / u.mass_unit  # kg/s -> canonical

        m0, p_max = cfg.m0, cfg.power.p_max
        self.defect_scale = np.array([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0 / m0])
        self.power_scale = 1.0 / p_max
        self.obj_scale = 1.0 / m0

        vs = np.ones(self.layout.n_vars)
        for j in range(n):
            vs[7 * j + 6] = m0
            vs[self.layout.p_e_index(j)] = p_max
        vs[self.layout.p_bl_index] = p_max
        self.var_scales = vs

        lo = np.empty(self.layout.n_vars)
        hi = np.empty(self.layout.n_vars)
        b = cfg.bounds
        l_lo = min(cfg.x0[5], cfg.xf[5]) - b.l_pad
        l_hi = max(cfg.x0[5], cfg.xf[5]) + b.l_pad
        state_lo = np.array([b.p[0], -b.fghk, -b.fghk, -b.fghk, -b.fghk, l_lo, b.mass_lo])
        state_hi = np.array([b.p[1], b.fghk, b.fghk, b.fghk, b.fghk, l_hi, m0])
        for j in range(n):
            lo[self.layout.state_slice(j)] = state_lo
            hi[self.layout.state_slice(j)] = state_hi
            lo[self.layout.alpha_slice(j)] = -1.1
            hi[self.layout.alpha_slice(j)] = 1.1
            lo[self.layout.p_e_index(j)] = 0.0
            # loose cap; the binding ceiling is the available-power inequality
            hi[self.layout.p_e_index(j)] = p_max
        lo[self.layout.p_bl_index], hi[self.layout.p_bl_index] = cfg.power.p_bl_bounds
        self.lower, self.upper = lo, hi

        # power rows evaluate the state/time at one node against the command
        # at possibly another (each interval's command must respect the
        # available power at both of its endpoints)
        self.pw_state_idx = np.concatenate([np.arange(n), np.arange(1, n)])
        self.pw_pe_idx = np.concatenate([np.arange(n), np.arange(n - 1)])
        self.pw_t_years = self.t_years[self.pw_state_idx]

        self._boundary_jac = self._build_boundary_jacobian()
        self._cache_z = None
        self._cache = None

    # rate kernel ----------------------------------------------------------

    def _rates(self, y, u):
        """Canonical rates of (p f g h k l m); generic over arrays and duals.

        The floors on p, m, and w only engage on wild internal RK4 stage
        values during a line search; node variables are box-bounded well
        above them, so converged solutions never touch the clamps.
        """
        p, f, g, h, k, l, m = y
        a1, a2, a3, pe = u
        p = ad.clip_min(p, 0.05)
        m = ad.clip_min(m, 10.0)
        etas = _activation_terms(pe, self.p_sel, self.p_scale, self.rho_e)
        thrust = 0.0
        mdot = 0.0
        for eta, t_i, md_i in zip(etas, self.t_sel, self.mdot_sel):
            if t_i != 0.0:
                thrust = thrust + eta * t_i
            if md_i != 0.0:
                mdot = mdot + eta * md_i
        acc = thrust * self.acc_factor / m
        dp, df, dg, dh, dk, dl = mee.gauss_rates(
            p, f, g, h, k, l, acc * a1, acc * a2, acc * a3, self.cfg.units.mu,
            w_floor=0.02,
        )
        dm = -1.0 * (mdot * self.mdot_factor)
        return (dp, df, dg, dh, dk, dl, dm)

    def _propagate(self, y, u):
        """One RK4 step of every interval at once (zero-order-hold control)."""
        return mee.rk4_step_components(y, lambda yy: self._rates(yy, u), self.h)

    # power kernel ---------------------------------------------------------

    def _power_residual(self, p, f, g, l, pe, p_bl, t_years):
        # clamp the radius into the distance-fit domain; iterates with w <= 0
        # or r beyond the fit's pole get a finite, steeply infeasible residual
        # instead of a domain error, and the clamps are inactive on any orbit
        # the mission can actually fly
        w = ad.clip_min(1.0 + f * ad.cos(l) + g * ad.sin(l), 0.02)
        r = ad.clip_max(p / w, 20.0)
        p_sa = solar_array_power(p_bl, r, t_years, self.cfg.power)
        p_ava = available_power_smooth(p_sa, self.cfg.power, self.rho_p_w)
        return (pe - p_ava) * self.power_scale

    # evaluation -----------------------------------------------------------

    def _split(self, z):
        n = self.layout.n_nodes
        states = z[: 7 * n].reshape(n, 7)
        controls = z[7 * n : 11 * n].reshape(n, 4)
        return states, controls, z[self.layout.p_bl_index]

    def eq_values(self, z):
        states, controls, _ = self._split(z)
        y = tuple(states[:-1, c] for c in range(7))
        u = tuple(controls[:-1, c] for c in range(4))
        phi = self._propagate(y, u)
        defects = (states[1:] - np.stack(phi, axis=1)) * self.defect_scale
        boundary = self._boundary_values(states)
        steering = np.einsum("ij,ij->i", controls[:, :3], controls[:, :3]) - 1.0
        return np.concatenate([defects.ravel(), boundary, steering])

    def ineq_values(self, z):
        states, controls, p_bl = self._split(z)
        s = states[self.pw_state_idx]
        pe = controls[self.pw_pe_idx, 3]
        return self._power_residual(
            s[:, 0], s[:, 1], s[:, 2], s[:, 5], pe, p_bl, self.pw_t_years
        )

    def _boundary_values(self, states):
        cfg = self.cfg
        out = np.empty(13)
        out[0:6] = states[0, :6] - cfg.x0
        out[6:12] = states[-1, :6] - cfg.xf
        out[12] = (states[0, 6] - cfg.m0) / cfg.m0
        return out

    def _build_boundary_jacobian(self):
        lay = self.layout
        base = lay.n_defect
        rows = base + np.arange(13)
        cols = np.concatenate([
            np.arange(6),
            7 * (lay.n_nodes - 1) + np.arange(6),
            [6],
        ])
        vals = np.concatenate([np.ones(12), [1.0 / self.cfg.m0]])
        return rows, cols, vals

    def objective(self, z) -> float:
        states, _, p_bl = self._split(z)
        bud, pw = self.cfg.budget, self.cfg.power
        m1, mn = states[0, 6], states[-1, 6]
        return float(
            bud.alpha_tank * m1
            - (1.0 + bud.alpha_tank) * mn
            + bud.gamma1 * p_bl
            + bud.gamma2 * pw.p_max
        )

    def gradient(self, z) -> np.ndarray:
        bud = self.cfg.budget
        g = np.zeros(self.layout.n_vars)
        g[6] = bud.alpha_tank
        g[7 * (self.layout.n_nodes - 1) + 6] = -(1.0 + bud.alpha_tank)
        g[self.layout.p_bl_index] = bud.gamma1
        return g

    def _assemble_eq_jac(self, states, controls):
        """Defect block via one batched dual sweep, plus constant tail rows."""
        lay = self.layout
        n = lay.n_nodes
        nb = n - 1

        comps = [states[:-1, c] for c in range(7)] + [controls[:-1, c] for c in range(4)]
        seeds = ad.seed_components(comps)
        y = tuple(seeds[:7])
        u = tuple(seeds[7:])
        phi = self._propagate(y, u)

        der = np.stack([phi[c].der for c in range(7)], axis=1)  # (nb, 7, 11)
        vals_prop = -der * self.defect_scale[None, :, None]

        i_idx = np.arange(nb)
        seed_cols = np.empty((nb, 11), dtype=np.int64)
        seed_cols[:, :7] = 7 * i_idx[:, None] + np.arange(7)
        seed_cols[:, 7:] = lay.controls_start + 4 * i_idx[:, None] + np.arange(4)
        def_rows = 7 * i_idx[:, None, None] + np.arange(7)[None, :, None]

        rows = [np.broadcast_to(def_rows, (nb, 7, 11)).ravel()]
        cols = [np.broadcast_to(seed_cols[:, None, :], (nb, 7, 11)).ravel()]
        vals = [vals_prop.ravel()]

        # +I on the right node of every defect row
        ident_rows = (7 * i_idx[:, None] + np.arange(7)).ravel()
        ident_cols = (7 * (i_idx + 1)[:, None] + np.arange(7)).ravel()
        rows.append(ident_rows)
        cols.append(ident_cols)
        vals.append(np.tile(self.defect_scale, nb))

        br, bc, bv = self._boundary_jac
        rows.append(br)
        cols.append(bc)
        vals.append(bv)

        steer_base = lay.n_defect + 13
        j_idx = np.arange(n)
        rows.append(np.repeat(steer_base + j_idx, 3))
        cols.append((lay.controls_start + 4 * j_idx[:, None] + np.arange(3)).ravel())
        vals.append(2.0 * controls[:, :3].ravel())

        jac = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(lay.n_eq, lay.n_vars),
        ).tocsr()

        phi_vals = np.stack([phi[c].val for c in range(7)], axis=1)
        defects = (states[1:] - phi_vals) * self.defect_scale
        boundary = self._boundary_values(states)
        steering = np.einsum("ij,ij->i", controls[:, :3], controls[:, :3]) - 1.0
        ceq = np.concatenate([defects.ravel(), boundary, steering])
        return ceq, jac

    def _assemble_ineq_jac(self, states, controls, p_bl):
        lay = self.layout
        s = states[self.pw_state_idx]
        pe = controls[self.pw_pe_idx, 3]
        nr = s.shape[0]

        comps = [s[:, 0], s[:, 1], s[:, 2], s[:, 5], pe, np.full(nr, p_bl)]
        seeds = ad.seed_components(comps)
        res = self._power_residual(*seeds, self.pw_t_years)

        state_cols = 7 * self.pw_state_idx[:, None] + np.array([0, 1, 2, 5])
        pe_cols = lay.controls_start + 4 * self.pw_pe_idx + 3
        cols = np.column_stack([
            state_cols,
            pe_cols,
            np.full(nr, lay.p_bl_index, dtype=np.int64),
        ])
        rows = np.broadcast_to(np.arange(nr)[:, None], (nr, 6))
        jac = sp.coo_matrix(
            (res.der.ravel(), (rows.ravel(), cols.ravel())),
            shape=(lay.n_ineq, lay.n_vars),
        ).tocsr()
        return res.val.copy(), jac

    def eq_jacobian(self, z):
        states, controls, _ = self._split(z)
        return self._assemble_eq_jac(states, controls)[1]

    def ineq_jacobian(self, z):
        states, controls, p_bl = self._split(z)
        return self._assemble_ineq_jac(states, controls, p_bl)[1]

    def eval_all(self, z):
        """One-pass objective, gradient, constraints, Jacobians (cached)."""
        key = z.tobytes()
        if self._cache_z == key:
            return self._cache
        states, controls, p_bl = self._split(z)
        ceq, jac_eq = self._assemble_eq_jac(states, controls)
        cin, jac_in = self._assemble_ineq_jac(states, controls, p_bl)
        out = (self.objective(z), self.gradient(z), ceq, jac_eq, cin, jac_in)
        self._cache_z = key
        self._cache = out
        return out

    def row_labels(self) -> list:
        lay = self.layout
        labels = [
            f"defect[{i}].{c}"
            for i in range(lay.n_nodes - 1)
            for c in ("p", "f", "g", "h", "k", "l", "m")
        ]
        labels += [f"initial.{c}" for c in ("p", "f", "g", "h", "k", "l")]
        labels += [f"terminal.{c}" for c in ("p", "f", "g", "h", "k", "l")]
        labels += ["initial.m"]
        labels += [f"steering[{j}]" for j in range(lay.n_nodes)]
        labels += [f"power_node[{j}]" for j in range(lay.n_nodes)]
        labels += [f"power_next[{i}]" for i in range(lay.n_nodes - 1)]
        return labels


def assemble(
    cfg: MissionConfig, mode_set: ModeSet, smoothing: SmoothingParams
) -> NlpProblem:
    """Build the NLP for one smoothing level. Re-call as continuation tightens."""
    tr = _Transcription(cfg, mode_set, smoothing)
    return NlpProblem(
        n_vars=tr.layout.n_vars,
        lower=tr.lower,
        upper=tr.upper,
        objective=tr.objective,
        gradient=tr.gradient,
        eq=tr.eq_values,
        eq_jac=tr.eq_jacobian,
        n_eq=tr.layout.n_eq,
        ineq=tr.ineq_values,
        ineq_jac=tr.ineq_jacobian,
        n_ineq=tr.layout.n_ineq,
        var_scales=tr.var_scales,
        obj_scale=tr.obj_scale,
        eval_all=tr.eval_all,
        row_labels=tr.row_labels(),
        layout=tr.layout,
    )


def propagate(
    cfg: MissionConfig,
    mode_set: ModeSet,
    smoothing: SmoothingParams,
    control_law,
    p_bl: float,
) -> tuple:
    """Discrete trajectory under a feedback control law.

    control_law(j, state) returns the interval-j control (a1, a2, a3, p_e).
    States follow the same one-step integrator the defect constraints use,
    so a decision vector assembled from the result has zero defect residual
    by construction. Returns (states, controls) of shapes (N, 7), (N, 4).
    """
    tr = _Transcription(cfg, mode_set, smoothing)
    n = cfg.n_nodes
    states = np.empty((n, 7))
    controls = np.empty((n, 4))
    states[0, :6] = cfg.x0
    states[0, 6] = cfg.m0
    for j in range(n - 1):
        controls[j] = control_law(j, states[j])
        y = tuple(states[j, c : c + 1] for c in range(7))
        u = tuple(controls[j, c : c + 1] for c in range(4))
        phi = tr._propagate(y, u)
        states[j + 1] = [float(comp[0]) for comp in phi]
    controls[n - 1] = control_law(n - 1, states[n - 1])
    return states, controls


def objective(point: DecisionPoint, cfg: MissionConfig) -> float:
    """Negative useful mass, expanded so the P_BL sensitivity is explicit.

    J = alpha_tank m_1 - (1 + alpha_tank) m_N + gamma1 P_BL + gamma2 P_max;
    minimizing J maximizes the delivered useful mass.
    """
    bud, pw = cfg.budget, cfg.power
    m1, mn = point.states[0, 6], point.states[-1, 6]
    return float(
        bud.alpha_tank * m1
        - (1.0 + bud.alpha_tank) * mn
        + bud.gamma1 * point.p_bl
        + bud.gamma2 * pw.p_max
    )


def mass_breakdown(point: DecisionPoint, cfg: MissionConfig) -> MassBreakdown:
    """Launch-mass budget implied by a decision point."""
    bud, pw = cfg.budget, cfg.power
    m1, mn = float(point.states[0, 6]), float(point.states[-1, 6])
    m_p = m1 - mn
    m_sa = bud.gamma1 * point.p_bl
    m_pspu = m_sa + bud.gamma2 * pw.p_max
    m_psfs = (1.0 + bud.alpha_tank) * m_p
    return MassBreakdown(
        m_useful=m1 - m_pspu - m_psfs,
        m_propellant=m_p,
        m_array=m_sa,
        m_power_system=m_pspu,
        m_propulsion=m_psfs,
        m_final=mn,
    )


def derivatives(problem: NlpProblem, point: DecisionPoint):
    """Objective gradient plus stacked constraint Jacobian triplets.

    Rows order equalities first, then inequalities; triplets are (rows, cols,
    values) of the row-scaled Jacobian at the point.
    """
    z = point.flatten()
    grad = problem.gradient(z)
    jac = problem.eq_jac(z)
    if problem.ineq_jac is not None:
        jac_in = problem.ineq_jac(z)
        jac = sp.vstack([jac, jac_in], format="csr")
    coo = jac.tocoo()
    return grad, (coo.row, coo.col, coo.data)
