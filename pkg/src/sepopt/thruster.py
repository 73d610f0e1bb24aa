"""Discrete thruster operating modes and their smooth blending.

A throttle table lists the measured operating points of the engine: input
power, thrust, mass flow, specific impulse, efficiency. The optimizer picks a
subset of rows, orders them by descending input power, and appends a synthetic
coast row (zero power, thrust, flow). A commanded electric power P_E then
selects the unique mode whose power window contains it; the smooth activation
vector replaces that hard window test with products of sigmoids whose width is
the continuation parameter rho_e, so thrust and mass flow stay differentiable
in P_E.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ad
from .errors import ConfigurationError, ThrottleTableError
from .units import G0_M_S2

_COLUMNS = ("mode", "power_W", "thrust_mN", "mdot_mg_s", "isp_s", "efficiency")

# conservative physical ceilings for a hall-effect thruster row; tripping one
# almost always means the file's units are wrong, not the hardware exotic
_MAX_THRUST_N = 1.0
_MAX_POWER_W = 1.0e5
_MAX_MDOT_KG_S = 1.0e-3
_ISP_CONSISTENCY_RTOL = 0.02


@dataclass(frozen=True)
class ThrottleMode:
    """One operating point, SI units (power W, thrust N, mdot kg/s, isp s)."""

    index: int
    power: float
    thrust: float
    mdot: float
    isp: float
    efficiency: float

    def __post_init__(self):
        for name in ("power", "thrust", "mdot", "isp", "efficiency"):
            if getattr(self, name) < 0.0:
                raise ThrottleTableError(f"mode {self.index}: {name} is negative")
        if self.thrust > 0.0 and self.mdot > 0.0 and self.isp > 0.0:
            implied = self.mdot * self.isp * G0_M_S2
            if abs(implied - self.thrust) > _ISP_CONSISTENCY_RTOL * self.thrust:
                raise ThrottleTableError(
                    f"mode {self.index}: thrust {self.thrust} N inconsistent with "
                    f"mdot*Isp*g0 = {implied:.4f} N beyond {_ISP_CONSISTENCY_RTOL:.0%}"
                )


def load_throttle_table(source) -> tuple[ThrottleMode, ...]:
    """Parse a throttle table from a CSV path or file-like object.

    Expects a header naming the columns mode, power_W, thrust_mN, mdot_mg_s,
    isp_s, efficiency (any order). Raises ThrottleTableError with the row and
    column of the first offending cell.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    elif hasattr(source, "read"):
        text = source.read()
    else:
        raise TypeError(f"expected a path or file-like source, got {type(source)!r}")

    lines = [ln.strip() for ln in io.StringIO(text)]
    rows = [ln for ln in lines if ln and not ln.startswith("#")]
    if not rows:
        raise ThrottleTableError("throttle table is empty")

    header = [c.strip() for c in rows[0].split(",")]
    missing = set(_COLUMNS) - set(header)
    if missing:
        raise ThrottleTableError(f"throttle table header missing {sorted(missing)}")
    pos = {name: header.index(name) for name in _COLUMNS}

    modes = []
    for lineno, row in enumerate(rows[1:], start=2):
        cells = [c.strip() for c in row.split(",")]
        if len(cells) != len(header):
            raise ThrottleTableError(
                f"row {lineno}: expected {len(header)} cells, got {len(cells)}"
            )
        parsed = {}
        for name in _COLUMNS:
            cell = cells[pos[name]]
            try:
                parsed[name] = int(cell) if name == "mode" else float(cell)
            except ValueError as exc:
                raise ThrottleTableError(
                    f"row {lineno}, column {name}: cannot parse {cell!r}"
                ) from exc
        power = parsed["power_W"]
        thrust = parsed["thrust_mN"] * 1.0e-3
        mdot = parsed["mdot_mg_s"] * 1.0e-6
        if power > _MAX_POWER_W:
            raise ThrottleTableError(
                f"row {lineno}: power {power} W exceeds sanity ceiling; check units"
            )
        if thrust > _MAX_THRUST_N:
            raise ThrottleTableError(
                f"row {lineno}: thrust {thrust} N exceeds sanity ceiling; check units"
            )
        if mdot > _MAX_MDOT_KG_S:
            raise ThrottleTableError(
                f"row {lineno}: mass flow {mdot} kg/s exceeds sanity ceiling; check units"
            )
        modes.append(
            ThrottleMode(
                index=parsed["mode"],
                power=power,
                thrust=thrust,
                mdot=mdot,
                isp=parsed["isp_s"],
                efficiency=parsed["efficiency"],
            )
        )

    indices = [m.index for m in modes]
    if len(set(indices)) != len(indices):
        raise ThrottleTableError("throttle table has duplicate mode indices")
    return tuple(modes)


@dataclass(frozen=True)
class ModeSet:
    """Chosen modes sorted by descending input power, coast row last.

    p_sel/t_sel/mdot_sel are aligned SI arrays over the sorted modes; p_scale
    (the largest selected power) normalizes mode-switch arguments so the
    smoothing width rho_e is dimensionless.
    """

    modes: tuple[ThrottleMode, ...]
    includes_coast: bool

    @property
    def p_sel(self) -> np.ndarray:
        return np.array([m.power for m in self.modes])

    @property
    def t_sel(self) -> np.ndarray:
        return np.array([m.thrust for m in self.modes])

    @property
    def mdot_sel(self) -> np.ndarray:
        return np.array([m.mdot for m in self.modes])

    @property
    def p_scale(self) -> float:
        return float(self.modes[0].power)

    def __len__(self) -> int:
        return len(self.modes)


def build_mode_set(
    table: tuple[ThrottleMode, ...], chosen, include_coast: bool = True
) -> ModeSet:
    """Select table rows by mode index and order them for activation logic."""
    chosen = list(chosen)
    if not chosen:
        raise ConfigurationError("mode selection is empty")
    if len(set(chosen)) != len(chosen):
        raise ConfigurationError(f"mode selection has duplicates: {chosen}")
    by_index = {m.index: m for m in table}
    unknown = [c for c in chosen if c not in by_index]
    if unknown:
        raise ConfigurationError(f"mode indices not in table: {unknown}")

    picked = sorted((by_index[c] for c in chosen), key=lambda m: -m.power)
    powers = [m.power for m in picked]
    if any(a <= b for a, b in zip(powers, powers[1:])):
        raise ConfigurationError(
            f"selected mode powers must be strictly decreasing, got {powers}"
        )
    if powers[-1] <= 0.0:
        raise ConfigurationError("selected modes must all draw positive power")

    modes = list(picked)
    if include_coast:
        coast_index = max(m.index for m in table) + 1
        modes.append(
            ThrottleMode(
                index=coast_index, power=0.0, thrust=0.0, mdot=0.0,
                isp=0.0, efficiency=0.0,
            )
        )
    return ModeSet(modes=tuple(modes), includes_coast=include_coast)


def _activation_terms(p_e, p_sel, p_scale: float, rho_e: float) -> list:
    """Smooth per-mode activations; generic over floats, arrays, and duals.

    The highest-power mode turns on once p_e clears its threshold; every later
    mode is the product "previous threshold not cleared, own threshold
    cleared". Thresholds compare in units of p_scale.
    """

    def step(x):
        return 0.5 * (1.0 + x / ad.sqrt(x * x + rho_e * rho_e))

    etas = []
    above_prev = None
    for i, p_mode in enumerate(p_sel):
        above = step((p_e - float(p_mode)) / p_scale)
        etas.append(above if i == 0 else (1.0 - above_prev) * above)
        above_prev = above
    return etas


@dataclass(frozen=True)
class ActivationVector:
    """Per-mode activations for one or many commanded powers.

    eta has shape (n_modes,) for a scalar command or (n_points, n_modes) for a
    vector of commands. Entries lie in (0, 1); as rho_e -> 0 the vector
    approaches the indicator of the hard power-window test.
    """

    eta: np.ndarray


def activation_vector(p_e, mode_set: ModeSet, rho_e: float) -> ActivationVector:
    if rho_e <= 0.0:
        raise ValueError(f"rho_e must be positive, got {rho_e}")
    p_e = np.asarray(p_e, dtype=float)
    terms = _activation_terms(p_e, mode_set.p_sel, mode_set.p_scale, rho_e)
    eta = np.stack([np.broadcast_to(t, p_e.shape) for t in terms], axis=-1)
    return ActivationVector(eta=eta)


def blended_output(eta, mode_set: ModeSet) -> tuple:
    """Activation-weighted thrust [N] and mass flow [kg/s].

    eta may be an ActivationVector or a bare array whose trailing axis runs
    over modes; scalar inputs give scalar outputs, batches give arrays.
    """
    arr = eta.eta if isinstance(eta, ActivationVector) else np.asarray(eta, dtype=float)
    if arr.shape[-1] != len(mode_set):
        raise ValueError(
            f"activation length {arr.shape[-1]} does not match mode set {len(mode_set)}"
        )
    thrust = arr @ mode_set.t_sel
    mdot = arr @ mode_set.mdot_sel
    if arr.ndim == 1:
        return float(thrust), float(mdot)
    return thrust, mdot
