"""Two-parameter continuation driving the smoothing widths to their targets.

Solving the mission NLP directly at sharp smoothing widths fails from cold
starts: the activation sigmoids are step-like and the solver sees flat,
then cliff. The cure is standard homotopy: solve a heavily smoothed problem
first, then tighten (rho_p, rho_e) geometrically, warm-starting each solve
from the previous solution and multipliers.

One wrinkle is specific to mode smoothing: at wide rho_e the activation
sigmoid cannot saturate within the commanded-power ceiling, which throttles
the achievable thrust, and a power-limited rendezvous can be genuinely
infeasible until the widths shrink. Early stalled steps are therefore not
failures; their least-violation iterates are carried forward as warm starts
and recorded as unconverged in the trace. While in that phase the baseline
array power is pinned at its guess value, because a violation-dominated
solve would otherwise grow the array to chase feasibility that does not
exist at those widths, dragging the design far from any optimum; the pin is
released, with a re-solve at the same width, as soon as a step converges or
its trajectory nearly closes.
Once some step has converged, a stall triggers one backoff retry at the
geometric interpolation between the last converged widths and the stalled
target before the driver moves on. The run aborts only if no width on the
schedule ever converges; otherwise the sharpest converged solution is
returned, flagged if short of target.
"""
from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import mee
from .errors import ConfigurationError, ContinuationAbortError
from .power import SmoothingParams, available_power_smooth, solar_array_power
from .solver import SolveResult, SolverOptions, solve
from .thruster import ModeSet
from .transcription import (
    DecisionPoint,
    MissionConfig,
    assemble,
    mass_breakdown,
    propagate,
    time_grid,
)
from .validation import ValidationReport, audit

# violation below which a stalled iterate counts as "nearly closed": safe to
# let the pinned design move again, and worth keeping the penalty across the
# handoff to the next width
_RELEASE_VIOL = 1.0e-3


@dataclass(frozen=True)
class ContinuationSchedule:
    """Sequence of (rho_p, rho_e) pairs, componentwise non-increasing.

    stall_policy caps the solver's outer iterations per step (None keeps the
    SolverOptions value); backoff_factor is the interpolation exponent used to
    pick the retry widths between the last converged and the stalled step.
    """

    steps: tuple
    stall_policy: int | None = None
    backoff_factor: float = 0.5

    def __post_init__(self):
        if not self.steps:
            raise ConfigurationError("continuation schedule has no steps")
        for rp, re in self.steps:
            if rp <= 0.0 or re <= 0.0:
                raise ConfigurationError("smoothing widths must stay positive")
        for (rp0, re0), (rp1, re1) in zip(self.steps, self.steps[1:]):
            if rp1 > rp0 or re1 > re0:
                raise ConfigurationError(
                    "schedule must be componentwise non-increasing, got "
                    f"({rp0}, {re0}) -> ({rp1}, {re1})"
                )
        if not 0.0 < self.backoff_factor < 1.0:
            raise ConfigurationError("backoff_factor must lie in (0, 1)")

    @property
    def target(self) -> tuple:
        return self.steps[-1]

    @classmethod
    def geometric(
        cls,
        start: tuple = (0.1, 0.1),
        target: tuple = (8.85e-4, 8.85e-4),
        factor: float = 0.5,
        freeze_threshold: float = 0.25,
        stall_policy: int | None = None,
        backoff_factor: float = 0.5,
    ) -> "ContinuationSchedule":
        """Multiply both widths by ``factor`` per step, clamped at the target.

        An aggressive rho_e step (factor below ``freeze_threshold``) freezes
        rho_p for that step so only one nonlinearity sharpens at a time.
        """
        if not 0.0 < factor < 1.0:
            raise ConfigurationError(f"factor must lie in (0, 1), got {factor}")
        (rp, re), (tp, te) = start, target
        if tp > rp or te > re:
            raise ConfigurationError("target widths must not exceed start widths")
        steps = [(rp, re)]
        while rp > tp or re > te:
            if re > te:
                re = max(re * factor, te)
                if factor >= freeze_threshold and rp > tp:
                    rp = max(rp * factor, tp)
            else:
                rp = max(rp * factor, tp)
            steps.append((rp, re))
        return cls(
            steps=tuple(steps), stall_policy=stall_policy, backoff_factor=backoff_factor
        )


@dataclass
class StepRecord:
    """Trace entry for one continuation solve attempt."""

    step: int
    rho_p: float
    rho_e: float
    objective: float
    feasibility: float
    kkt: float
    iterations: int
    inner_evals: int
    p_bl: float
    backed_off: bool
    converged: bool
    wall_time: float


@dataclass
class ContinuationTrace:
    records: list = field(default_factory=list)

    def append(self, record: StepRecord):
        self.records.append(record)

    def __len__(self):
        return len(self.records)


@dataclass
class MissionSolution:
    """Converged decision point at the sharpest smoothing level reached."""

    point: DecisionPoint
    objective: float
    rho_p: float
    rho_e: float
    reached_target: bool
    kkt_residual: float
    constraint_violation: float
    multipliers: tuple
    status: str
    message: str = ""

    @property
    def p_bl(self) -> float:
        return self.point.p_bl

    def breakdown(self, cfg: MissionConfig):
        return mass_breakdown(self.point, cfg)


def initial_guess(
    cfg: MissionConfig, mode_set: ModeSet, smoothing: SmoothingParams
) -> DecisionPoint:
    """Cold-start point from a burn-while-power-lasts forward propagation.

    Steering follows the velocity direction (near-tangential thrust raises
    orbit energy fastest), the commanded power picks the highest throttle
    mode the local available power affords with a small margin, and the
    baseline array power is sized so that mode stays affordable out to
    about 1.9 au at mid-mission degradation. States come from the
    transcription's own one-step integrator, so the guess satisfies the
    defect, steering, and power rows at machine precision and all of its
    infeasibility sits in the terminal boundary rows, which the solver
    then pulls in the way a shooting method would.

    Rendezvous with a fixed arrival time couples orbit energy to phasing:
    burning early raises the orbit and slows the accumulated longitude, so
    a single burn-until-done law generally misses the target phase. The law
    therefore has two knobs, the burn start node and the semi-latus-rectum
    cutoff, fitted by a coarse grid of cheap propagations to minimize the
    terminal mismatch before any optimization runs.
    """
    pw = cfg.power
    p_sel = np.asarray(mode_set.p_sel, dtype=float)
    thrusting = p_sel[p_sel > 0.0]  # descending
    # commanded power must clear a window edge by a few widths before the
    # activation actually saturates; capped so wide-width guesses still burn
    edge = 6.0 * smoothing.rho_e * mode_set.p_scale
    margin_w = 2.0

    t_mid = cfg.units.years_from_time(0.5 * cfg.tof)
    need = thrusting[0] / pw.duty_cycle + pw.p_sys + margin_w
    p_bl = need / solar_array_power(1.0, 1.9, t_mid, pw)
    p_bl = float(np.clip(p_bl, *pw.p_bl_bounds))

    rho_p_w = smoothing.rho_p * pw.p_max
    t_years = cfg.units.years_from_time(time_grid(cfg))

    h = cfg.tof / (cfg.n_nodes - 1)

    def afford_at(r, t):
        p_sa = solar_array_power(p_bl, r, t, pw)
        return available_power_smooth(p_sa, pw, rho_p_w) - margin_w

    def make_law(start_node, p_cut):
        def law(j, y):
            cart = mee.mee_to_cartesian(mee.MeeState.from_array(y[:6]), cfg.units)
            v_rtn = mee.rtn_basis(cart) @ cart.velocity
            alpha = v_rtn / np.linalg.norm(v_rtn)

            if j < start_node or y[0] >= p_cut:
                return np.append(alpha, 0.0)

            w = 1.0 + y[1] * np.cos(y[5]) + y[2] * np.sin(y[5])
            r = y[0] / w
            v_r = np.sqrt(cfg.units.mu / y[0]) * (
                y[1] * np.sin(y[5]) - y[2] * np.cos(y[5])
            )
            # the command must respect available power at both interval
            # ends, so look ahead to the radius the node will drift to
            t_next = t_years[min(j + 1, cfg.n_nodes - 1)]
            afford = min(
                afford_at(r, t_years[j]), afford_at(r + v_r * h, t_next)
            )
            hit = np.flatnonzero(thrusting + margin_w <= afford)
            if hit.size == 0:
                return np.append(alpha, 0.0)
            i = hit[0]  # highest-power affordable mode
            pe = afford
            if i > 0:
                gap = thrusting[i - 1] - thrusting[i]
                pe = min(pe, thrusting[i - 1] - min(edge, 0.45 * gap))
            return np.append(alpha, pe)

        return law

    n = cfg.n_nodes
    weights = np.array([4.0, 4.0, 4.0, 4.0, 4.0, 1.0])
    best = None
    for start_node in range(0, n // 3 + 1, max(1, n // 30)):
        for p_cut in np.linspace(cfg.xf[0] - 0.35, cfg.xf[0] + 0.15, 9):
            states, controls = propagate(
                cfg, mode_set, smoothing, make_law(start_node, p_cut), p_bl
            )
            miss = states[-1, :6] - cfg.xf
            score = float(weights @ miss**2)
            if best is None or score < best[0]:
                best = (score, states, controls)

    _, states, controls = best
    return DecisionPoint(
        states=states,
        steering=controls[:, :3],
        p_e=controls[:, 3],
        p_bl=p_bl,
    )


def run_continuation(
    cfg: MissionConfig,
    mode_set: ModeSet,
    schedule: ContinuationSchedule,
    options: SolverOptions | None = None,
    initial: DecisionPoint | None = None,
    time_budget_s: float | None = None,
    log=None,
) -> tuple:
    """Drive the smoothing widths down the schedule; returns (solution, trace)."""
    opts = options or SolverOptions()
    if schedule.stall_policy is not None:
        opts = replace(opts, max_iterations=schedule.stall_policy)

    trace = ContinuationTrace()
    t0 = time.perf_counter()

    def emit(msg):
        if log is not None:
            print(msg, file=sys.stderr if log is True else log, flush=True)

    def attempt(rho_p, rho_e, z, mults, mu0=None, fix_p_bl=None) -> SolveResult:
        problem = assemble(cfg, mode_set, SmoothingParams(rho_p, rho_e))
        if fix_p_bl is not None:
            i = problem.layout.p_bl_index
            problem.lower[i] = problem.upper[i] = fix_p_bl
        return solve(problem, z, opts, multipliers=mults, penalty_start=mu0)

    def record(step_idx, rho_p, rho_e, res, backed_off):
        point = DecisionPoint.unflatten(res.z, assemble_layout)
        trace.append(
            StepRecord(
                step=step_idx, rho_p=rho_p, rho_e=rho_e, objective=res.objective,
                feasibility=res.constraint_violation, kkt=res.kkt_residual,
                iterations=res.iterations, inner_evals=res.inner_evals,
                p_bl=point.p_bl, backed_off=backed_off,
                converged=res.status == "converged", wall_time=res.wall_time,
            )
        )

    first = initial or initial_guess(
        cfg, mode_set, SmoothingParams(*schedule.steps[0])
    )
    z = first.flatten()
    mults = None
    mu0 = None
    released = False
    assemble_layout = assemble(cfg, mode_set, SmoothingParams(*schedule.steps[0])).layout

    last_good = None  # (z, mults, mu0, rho_p, rho_e, result)
    message = ""

    def advance(res, rho_p, rho_e):
        nonlocal z, mults, mu0, last_good
        z, mults = res.z, (res.multipliers_eq, res.multipliers_ineq)
        # restarting the next step at the converged penalty keeps the warm
        # start glued to the feasible set (capped so a step that converged
        # right at the penalty ceiling cannot over-stiffen its successor)
        mu0 = min(res.penalty_final, 1.0e7)
        last_good = (z, mults, mu0, rho_p, rho_e, res)

    for idx, (rho_p, rho_e) in enumerate(schedule.steps):
        # while no width has converged yet, the wide-smoothing subproblems can
        # be genuinely infeasible, and a violation-dominated solve will happily
        # trade design mass for feasibility it cannot reach (the array grows
        # without bound). Pin the baseline power until either a width
        # converges or the trajectory nearly closes, then release it.
        pinned = last_good is None and not released
        fix = float(z[assemble_layout.p_bl_index]) if pinned else None
        res = attempt(rho_p, rho_e, z, mults, mu0, fix_p_bl=fix)
        emit(
            f"step {idx + 1}/{len(schedule.steps)} rho=({rho_p:.3e},{rho_e:.3e}) "
            f"status={res.status} f={res.objective:.4f} viol={res.constraint_violation:.2e} "
            f"it={res.iterations} evals={res.inner_evals} t={res.wall_time:.1f}s"
        )
        record(idx + 1, rho_p, rho_e, res, backed_off=False)
        if res.status == "converged":
            if pinned:
                released = True
                emit("  first convergence; releasing the baseline power")
                res_free = attempt(
                    rho_p, rho_e, res.z,
                    (res.multipliers_eq, res.multipliers_ineq),
                    min(res.penalty_final, 1.0e7),
                )
                record(idx + 1, rho_p, rho_e, res_free, backed_off=False)
                if res_free.status == "converged":
                    res = res_free
            advance(res, rho_p, rho_e)
        else:
            rescued = False
            if pinned and res.constraint_violation < _RELEASE_VIOL:
                # the trajectory nearly closes at the pinned design, so the
                # design may move again without chasing ghost feasibility;
                # re-solve at the same width, keeping the penalty so the
                # objective cannot drag the almost-feasible iterate away
                released = True
                emit("  nearly feasible; releasing the baseline power")
                res_free = attempt(
                    rho_p, rho_e, res.z, None, min(res.penalty_final, 1.0e7)
                )
                emit(
                    f"  released solve status={res_free.status} "
                    f"viol={res_free.constraint_violation:.2e}"
                )
                record(idx + 1, rho_p, rho_e, res_free, backed_off=False)
                if res_free.status == "converged":
                    advance(res_free, rho_p, rho_e)
                    rescued = True
                elif res_free.constraint_violation < res.constraint_violation:
                    res = res_free
            elif last_good is not None:
                gz, gm, g_mu, g_rp, g_re, _ = last_good
                b = schedule.backoff_factor
                mid = (g_rp ** (1 - b) * rho_p**b, g_re ** (1 - b) * rho_e**b)
                emit(f"  stalled; backing off to rho=({mid[0]:.3e},{mid[1]:.3e})")
                res_mid = attempt(mid[0], mid[1], gz, gm, g_mu)
                if res_mid.status == "converged":
                    record(idx + 1, mid[0], mid[1], res_mid, backed_off=True)
                    advance(res_mid, mid[0], mid[1])
                    # whether or not the retry lands, the converged backoff
                    # point stays the warm state for whatever comes next
                    rescued = True
                    res_retry = attempt(rho_p, rho_e, z, mults, mu0)
                    emit(
                        f"  retry at target rho=({rho_p:.3e},{rho_e:.3e}) "
                        f"status={res_retry.status}"
                    )
                    record(idx + 1, rho_p, rho_e, res_retry, backed_off=False)
                    if res_retry.status == "converged":
                        advance(res_retry, rho_p, rho_e)
            if not rescued:
                # stalled width with nothing converged nearby: keep the
                # least-violation iterate as the next warm start; sharper mode
                # widths widen the feasible set, so pressing on is more
                # productive than stopping here. The multipliers of an
                # infeasible plateau scale with the penalty rather than with
                # any KKT point, so they are not carried; the penalty is, but
                # only once the iterate is close enough to feasible that the
                # objective would otherwise tear it away during the re-ramp.
                z = res.z
                mults = None
                mu0 = (
                    min(res.penalty_final, 1.0e7)
                    if res.constraint_violation < _RELEASE_VIOL
                    else None
                )
        if (
            time_budget_s is not None
            and time.perf_counter() - t0 > time_budget_s
            and idx + 1 < len(schedule.steps)
        ):
            message = f"time budget exhausted after step {idx + 1}"
            break

    if last_good is None:
        best = min((r.feasibility for r in trace.records), default=float("inf"))
        raise ContinuationAbortError(
            f"no continuation step converged; best violation {best:.3e}",
            trace=trace,
        )

    z, mults, mu0, rho_p, rho_e, res = last_good
    reached = (rho_p, rho_e) == schedule.target
    if not reached and not message:
        message = (
            f"continuation finished short of target at "
            f"(rho_p={rho_p:.3e}, rho_e={rho_e:.3e})"
        )
    solution = MissionSolution(
        point=DecisionPoint.unflatten(z, assemble_layout),
        objective=res.objective,
        rho_p=rho_p,
        rho_e=rho_e,
        reached_target=reached,
        kkt_residual=res.kkt_residual,
        constraint_violation=res.constraint_violation,
        multipliers=mults,
        status=res.status,
        message=message,
    )
    return solution, trace


@dataclass
class ComparisonRow:
    """One mode subset's outcome in a side-by-side sweep."""

    modes: tuple
    solution: MissionSolution
    trace: ContinuationTrace
    report: ValidationReport


def compare_modesets(
    cfg: MissionConfig,
    table,
    subsets,
    schedule: ContinuationSchedule,
    options: SolverOptions | None = None,
    time_budget_s: float | None = None,
    log=None,
) -> list:
    """Run the full continuation once per mode subset; shares nothing between
    runs so rows are independently reproducible."""
    from .thruster import build_mode_set

    rows = []
    t0 = time.perf_counter()
    for subset in subsets:
        remaining = None
        if time_budget_s is not None:
            remaining = max(0.0, time_budget_s - (time.perf_counter() - t0))
        ms = build_mode_set(table, subset)
        solution, trace = run_continuation(
            cfg, ms, schedule, options=options,
            time_budget_s=remaining, log=log,
        )
        report = audit(solution.point, cfg, ms, solution.rho_e)
        rows.append(
            ComparisonRow(
                modes=tuple(subset), solution=solution, trace=trace, report=report
            )
        )
    return rows
