"""YAML run configuration: parsing, validation, bundled defaults."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .continuation import ContinuationSchedule
from .errors import ConfigurationError
from .power import PowerPlantConfig
from .solver import SolverOptions
from .thruster import ThrottleMode, load_throttle_table
from .transcription import MassBudgetConfig, MissionConfig, StateBounds

_TOP_LEVEL = {"mission", "power", "budget", "thruster", "continuation", "solver", "compare", "bounds"}


@dataclass
class RunConfig:
    """Everything a CLI run needs, decoded and validated."""

    mission: MissionConfig
    table: tuple[ThrottleMode, ...]
    mode_indices: list
    schedule: ContinuationSchedule
    solver: SolverOptions
    compare_subsets: list


def default_config_path() -> Path:
    return Path(resources.files("sepopt").joinpath("data/earth_67p.yaml"))


def default_table_path() -> Path:
    return Path(resources.files("sepopt").joinpath("data/spt140.csv"))


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigurationError(f"missing key {where}.{key}")
    return mapping[key]


def _floats(x, where: str, length: int | None = None) -> list:
    if not isinstance(x, (list, tuple)):
        raise ConfigurationError(f"{where} must be a list")
    try:
        vals = [float(v) for v in x]
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{where} has a non-numeric entry: {x}") from exc
    if length is not None and len(vals) != length:
        raise ConfigurationError(f"{where} must have {length} entries, got {len(vals)}")
    return vals


def _float(x, where: str) -> float:
    try:
        return float(x)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{where} must be a number, got {x!r}") from exc


def load_config(
    path=None,
    table_path=None,
    nodes: int | None = None,
    schedule_override: ContinuationSchedule | None = None,
) -> RunConfig:
    """Load and validate a run configuration.

    ``path`` defaults to the bundled Earth -> 67P mission; ``table_path``
    overrides the throttle table named in the file (or the bundled one).
    ``nodes`` and ``schedule_override`` apply CLI-level overrides.
    """
    cfg_path = Path(path) if path is not None else default_config_path()
    try:
        raw = yaml.safe_load(cfg_path.read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {cfg_path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cannot parse config {cfg_path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {cfg_path} is not a mapping")

    unknown = set(raw) - _TOP_LEVEL
    if unknown:
        raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")

    mission_raw = _require(raw, "mission", "config")
    power_raw = _require(raw, "power", "config")
    budget_raw = raw.get("budget", {})
    thruster_raw = _require(raw, "thruster", "config")
    cont_raw = raw.get("continuation", {})

    power = PowerPlantConfig(
        p_bl_bounds=tuple(_floats(_require(power_raw, "p_bl_bounds_W", "power"), "power.p_bl_bounds_W", 2)),
        p_max=_float(_require(power_raw, "p_max_W", "power"), "power.p_max_W"),
        p_sys=_float(_require(power_raw, "p_sys_W", "power"), "power.p_sys_W"),
        duty_cycle=_float(_require(power_raw, "duty_cycle", "power"), "power.duty_cycle"),
        sigma=_float(_require(power_raw, "sigma_per_year", "power"), "power.sigma_per_year"),
    )
    budget = MassBudgetConfig(
        gamma1=_float(budget_raw.get("gamma1_kg_per_W", 0.01), "budget.gamma1_kg_per_W"),
        gamma2=_float(budget_raw.get("gamma2_kg_per_W", 0.015), "budget.gamma2_kg_per_W"),
        alpha_tank=_float(budget_raw.get("alpha_tank", 0.1), "budget.alpha_tank"),
    )

    bounds = StateBounds()
    if "bounds" in raw:
        b = raw["bounds"]
        bounds = StateBounds(
            p=tuple(_floats(b.get("p", list(bounds.p)), "bounds.p", 2)),
            fghk=_float(b.get("fghk", bounds.fghk), "bounds.fghk"),
            l_pad=_float(b.get("l_pad", bounds.l_pad), "bounds.l_pad"),
            mass_lo=_float(b.get("mass_lo_kg", bounds.mass_lo), "bounds.mass_lo_kg"),
        )

    mission = MissionConfig(
        x0=np.array(_floats(_require(mission_raw, "x0", "mission"), "mission.x0", 6)),
        xf=np.array(_floats(_require(mission_raw, "xf", "mission"), "mission.xf", 6)),
        m0=_float(_require(mission_raw, "m0_kg", "mission"), "mission.m0_kg"),
        tof_days=_float(_require(mission_raw, "tof_days", "mission"), "mission.tof_days"),
        n_nodes=int(nodes if nodes is not None else mission_raw.get("nodes", 100)),
        power=power,
        budget=budget,
        bounds=bounds,
    )

    tbl = table_path or thruster_raw.get("table")
    table = load_throttle_table(Path(tbl) if tbl else default_table_path())
    mode_indices = [int(m) for m in _require(thruster_raw, "modes", "thruster")]

    if schedule_override is not None:
        schedule = schedule_override
    elif "steps" in cont_raw:
        steps = tuple(
            tuple(_floats(s, "continuation.steps[i]", 2)) for s in cont_raw["steps"]
        )
        schedule = ContinuationSchedule(
            steps=steps,
            stall_policy=cont_raw.get("stall_policy"),
            backoff_factor=_float(cont_raw.get("backoff_factor", 0.5), "continuation.backoff_factor"),
        )
    else:
        schedule = ContinuationSchedule.geometric(
            start=tuple(_floats(cont_raw.get("rho_start", [0.1, 0.1]), "continuation.rho_start", 2)),
            target=tuple(_floats(cont_raw.get("rho_target", [8.85e-4, 8.85e-4]), "continuation.rho_target", 2)),
            factor=_float(cont_raw.get("factor", 0.5), "continuation.factor"),
            stall_policy=cont_raw.get("stall_policy"),
            backoff_factor=_float(cont_raw.get("backoff_factor", 0.5), "continuation.backoff_factor"),
        )

    solver = SolverOptions()
    if "solver" in raw:
        known = {f.name for f in dataclasses.fields(SolverOptions)}
        bad = set(raw["solver"]) - known
        if bad:
            raise ConfigurationError(f"unknown solver options: {sorted(bad)}")
        solver = SolverOptions(**raw["solver"])

    compare_subsets = []
    if "compare" in raw:
        subsets = _require(raw["compare"], "subsets", "compare")
        compare_subsets = [[int(m) for m in subset] for subset in subsets]

    return RunConfig(
        mission=mission,
        table=table,
        mode_indices=mode_indices,
        schedule=schedule,
        solver=solver,
        compare_subsets=compare_subsets,
    )
