"""Modified equinoctial elements: state types, Gauss rates, RK4 stepping.

The element set (p, f, g, h, k, l) is nonsingular for the zero-eccentricity and
zero-inclination orbits this mission passes through; the true longitude l is
kept unwrapped so multi-revolution arcs stay smooth. Perturbing accelerations
are expressed in the rotating RTN frame (radial, transverse, normal).

The rate and conversion kernels are written componentwise through the
:mod:`sepopt.ad` dispatch helpers, so the identical formulas serve the plain
float path, vectorized node batches, and dual-number Jacobian sweeps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ad
from .errors import DegenerateOrbitError
from .units import CanonicalUnits


@dataclass(frozen=True)
class MeeState:
    """Modified equinoctial elements; p in canonical lengths, l in radians."""

    p: float
    f: float
    g: float
    h: float
    k: float
    l: float

    def __post_init__(self):
        if not self.p > 0.0:
            raise ValueError(f"semi-latus rectum must be positive, got {self.p}")

    def as_array(self) -> np.ndarray:
        return np.array([self.p, self.f, self.g, self.h, self.k, self.l])

    @classmethod
    def from_array(cls, arr) -> "MeeState":
        p, f, g, h, k, l = (float(x) for x in arr)
        return cls(p, f, g, h, k, l)


@dataclass(frozen=True)
class FullState:
    """Orbit elements plus spacecraft mass [kg]."""

    mee: MeeState
    mass: float

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ValueError(f"mass must be positive, got {self.mass}")

    def as_array(self) -> np.ndarray:
        return np.append(self.mee.as_array(), self.mass)

    @classmethod
    def from_array(cls, arr) -> "FullState":
        return cls(MeeState.from_array(arr[:6]), float(arr[6]))


@dataclass(frozen=True)
class CartesianState:
    """Inertial position and velocity, canonical units."""

    position: np.ndarray
    velocity: np.ndarray


def _w_of(f, g, l):
    return 1.0 + f * ad.cos(l) + g * ad.sin(l)


def _radius(p, f, g, l):
    return p / _w_of(f, g, l)


def heliocentric_radius(state: MeeState) -> float:
    """Distance from the sun, r = p / (1 + f cos l + g sin l)."""
    w = _w_of(state.f, state.g, state.l)
    if w <= 0.0:
        raise DegenerateOrbitError(f"w = {w} <= 0 at l = {state.l}")
    return state.p / w


def _position_velocity(p, f, g, h, k, l, mu):
    """Componentwise MEE -> inertial Cartesian. Generic over arrays/duals."""
    cl = ad.cos(l)
    sl = ad.sin(l)
    w = 1.0 + f * cl + g * sl
    s2 = 1.0 + h * h + k * k
    a2 = h * h - k * k
    r = p / w
    vfac = ad.sqrt(mu / p) / s2
    rx = (r / s2) * (cl + a2 * cl + 2.0 * h * k * sl)
    ry = (r / s2) * (sl - a2 * sl + 2.0 * h * k * cl)
    rz = (2.0 * r / s2) * (h * sl - k * cl)
    vx = -vfac * (sl + a2 * sl - 2.0 * h * k * cl + g - 2.0 * f * h * k + a2 * g)
    vy = -vfac * (-cl + a2 * cl + 2.0 * h * k * sl - f + 2.0 * g * h * k + a2 * f)
    vz = 2.0 * vfac * (h * cl + k * sl + f * h + g * k)
    return rx, ry, rz, vx, vy, vz


def mee_to_cartesian(state: MeeState, units: CanonicalUnits) -> CartesianState:
    w = _w_of(state.f, state.g, state.l)
    if w <= 0.0:
        raise DegenerateOrbitError(f"w = {w} <= 0 at l = {state.l}")
    rx, ry, rz, vx, vy, vz = _position_velocity(
        state.p, state.f, state.g, state.h, state.k, state.l, units.mu
    )
    return CartesianState(
        position=np.array([rx, ry, rz]), velocity=np.array([vx, vy, vz])
    )


def rtn_basis(cart: CartesianState) -> np.ndarray:
    """Rows are the radial, transverse, normal unit vectors."""
    r_hat = cart.position / np.linalg.norm(cart.position)
    n_vec = np.cross(cart.position, cart.velocity)
    n_hat = n_vec / np.linalg.norm(n_vec)
    t_hat = np.cross(n_hat, r_hat)
    return np.vstack([r_hat, t_hat, n_hat])


def gauss_rates(p, f, g, h, k, l, a_r, a_t, a_n, mu, w_floor=None):
    """Time derivatives of the six elements under an RTN acceleration.

    Componentwise and generic: every argument may be a float, an array batch,
    or an :class:`~sepopt.ad.Dual`.

    ``w_floor``, when given, clamps the longitude denominator w from below so
    the kernel stays totally defined on unphysical intermediate iterates an
    optimizer's line search may produce. The default evaluates the exact
    formulas (w may then be zero or negative and the rates singular).
    """
    cl = ad.cos(l)
    sl = ad.sin(l)
    w = 1.0 + f * cl + g * sl
    if w_floor is not None:
        w = ad.clip_min(w, w_floor)
    s2 = 1.0 + h * h + k * k
    # h sin l - k cos l couples the out-of-plane acceleration into f, g, l
    hk = h * sl - k * cl
    root_p_mu = ad.sqrt(p / mu)
    dp = (2.0 * p / w) * root_p_mu * a_t
    df = root_p_mu * (a_r * sl + (((w + 1.0) * cl + f) * a_t - g * hk * a_n) / w)
    dg = root_p_mu * (-a_r * cl + (((w + 1.0) * sl + g) * a_t + f * hk * a_n) / w)
    dh = root_p_mu * (s2 / (2.0 * w)) * a_n * cl
    dk = root_p_mu * (s2 / (2.0 * w)) * a_n * sl
    dl = ad.sqrt(mu * p) * (w / p) ** 2 + root_p_mu * hk * a_n / w
    return dp, df, dg, dh, dk, dl


def mee_rates(
    state: FullState,
    accel_rtn,
    units: CanonicalUnits,
    mdot: float = 0.0,
) -> np.ndarray:
    """Rates of [p f g h k l m]. accel_rtn canonical, mdot canonical mass/time.

    mdot is the (positive) propellant flow; the mass rate is its negative.
    """
    s = state.mee
    if _w_of(s.f, s.g, s.l) <= 0.0:
        raise DegenerateOrbitError(f"w <= 0 at l = {s.l}")
    a_r, a_t, a_n = (float(a) for a in accel_rtn)
    dp, df, dg, dh, dk, dl = gauss_rates(
        s.p, s.f, s.g, s.h, s.k, s.l, a_r, a_t, a_n, units.mu
    )
    return np.array([dp, df, dg, dh, dk, dl, -mdot])


def rk4_step(state: FullState, control, t: float, h: float, rate_fn) -> FullState:
    """One classical RK4 step holding ``control`` fixed across all four stages.

    ``rate_fn(t, y, control)`` maps a 7-vector [p f g h k l m] to its rates.
    """
    y = state.as_array()
    k1 = rate_fn(t, y, control)
    k2 = rate_fn(t + 0.5 * h, y + 0.5 * h * k1, control)
    k3 = rate_fn(t + 0.5 * h, y + 0.5 * h * k2, control)
    k4 = rate_fn(t + h, y + h * k3, control)
    y_next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return FullState.from_array(y_next)


def rk4_step_components(y, rate_fn, h):
    """Classical RK4 on a tuple of state components (autonomous dynamics).

    Components may be arrays or duals; ``rate_fn`` maps a component tuple to a
    rate tuple. This is the kernel the transcription batches its defect
    constraints through.
    """
    k1 = rate_fn(y)
    k2 = rate_fn(tuple(yi + (0.5 * h) * ki for yi, ki in zip(y, k1)))
    k3 = rate_fn(tuple(yi + (0.5 * h) * ki for yi, ki in zip(y, k2)))
    k4 = rate_fn(tuple(yi + h * ki for yi, ki in zip(y, k3)))
    sixth = h / 6.0
    return tuple(
        yi + sixth * (a + 2.0 * b + 2.0 * c + d)
        for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
    )
