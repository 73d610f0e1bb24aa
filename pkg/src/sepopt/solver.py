"""Bound-constrained augmented Lagrangian solver for the transcribed NLP.

Inequalities gain nonnegative slacks, c(z) + s = 0, so every constraint is an
equality and the subproblem is minimization of

    L_A(z, s) = sigma f(z) - lambda^T r + (mu/2) r^T r,   r = [c_eq; c_in + s]

over the box bounds. The default subproblem solver is a projected
Gauss-Newton iteration built on the problem's exact sparse constraint
jacobian; scipy's L-BFGS-B (a mature bound-constrained quasi-Newton code) is
available as a structure-agnostic fallback. This module owns what actually
decides convergence: the multiplier updates and the penalty schedule.

Penalty management follows the practical safeguarded recipe: first-order
multiplier updates happen every outer iteration, and the penalty grows only
when the infeasibility fails to shrink by a fixed ratio. Keeping mu small
still helps the fallback quasi-Newton inner, whose accuracy degrades as the
penalty surface stiffens; the Gauss-Newton inner is indifferent to mu because
the penalty scales its model Hessian and gradient together.

The solver works on nondimensionalized variables (columns divided by
problem.var_scales) and on the row-scaled residuals the problem returns, so
its tolerances are meaningful regardless of the physical units involved.
Reported objectives are unscaled.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.optimize
import scipy.sparse as sp
import scipy.sparse.linalg

from .transcription import NlpProblem


@dataclass
class SolverOptions:
    tol_kkt: float = 1.0e-5
    tol_constraint: float = 1.0e-7
    max_iterations: int = 60
    penalty_init: float = 10.0
    penalty_growth: float = 4.0
    penalty_max: float = 1.0e9
    # multiplier safeguard: first-order estimates are clipped to this magnitude
    multiplier_max: float = 1.0e8
    # penalty grows only when ||r||_inf fails to drop below this fraction of
    # the previous outer iteration's value
    progress_ratio: float = 0.7
    # "gauss_newton": projected Gauss-Newton on the subproblem, using the
    # exact sparse constraint jacobian (step quality independent of the
    # penalty, so large mu costs nothing); "lbfgsb": scipy's limited-memory
    # quasi-Newton, kept as a jacobian-structure-agnostic fallback
    inner_solver: str = "gauss_newton"
    inner_max_iterations: int = 100
    inner_memory: int = 30
    inner_ftol: float = 1.0e-14
    init_tol_gradient: float = 1.0e-2
    # outer iterations with < 1% feasibility progress before giving up early
    # (0 disables); a locally infeasible instance otherwise burns the whole
    # iteration budget riding the penalty ramp
    stall_window: int = 8
    verbosity: int = 0


@dataclass
class SolveResult:
    """Outcome of one NLP solve. status is one of converged, max_iterations,
    numeric_failure; objective/violation are the physical objective and the
    worst row-scaled constraint violation."""

    z: np.ndarray
    objective: float
    kkt_residual: float
    constraint_violation: float
    iterations: int
    status: str
    multipliers_eq: np.ndarray
    multipliers_ineq: np.ndarray
    message: str = ""
    inner_evals: int = 0
    wall_time: float = 0.0
    penalty_final: float = 0.0


@dataclass(frozen=True)
class KktReport:
    """First-order optimality diagnostics at a point/multiplier pair."""

    stationarity: float
    primal_feasibility: float
    complementarity: float

    def as_dict(self) -> dict:
        return {
            "stationarity": self.stationarity,
            "primal_feasibility": self.primal_feasibility,
            "complementarity": self.complementarity,
        }


class _NumericFailure(Exception):
    def __init__(self, detail):
        super().__init__(detail)
        self.detail = detail


class _Evaluator:
    """Caches one full problem evaluation per decision vector."""

    def __init__(self, problem: NlpProblem):
        self.problem = problem
        self.count = 0
        self._key = None
        self._out = None

    def __call__(self, z: np.ndarray):
        key = z.tobytes()
        if key == self._key:
            return self._out
        p = self.problem
        if p.eval_all is not None:
            f, g, ceq, jac_eq, cin, jac_in = p.eval_all(z)
        else:
            f = p.objective(z)
            g = p.gradient(z)
            ceq = p.eq(z)
            jac_eq = p.eq_jac(z)
            if p.ineq is not None:
                cin = p.ineq(z)
                jac_in = p.ineq_jac(z)
            else:
                cin = np.zeros(0)
                jac_in = sp.csr_matrix((0, p.n_vars))
        self.count += 1
        self._check(f, g, ceq, jac_eq, cin, jac_in)
        self._key = key
        self._out = (f, g, ceq, jac_eq, cin, jac_in)
        return self._out

    def _check(self, f, g, ceq, jac_eq, cin, jac_in):
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            raise _NumericFailure("objective or gradient is not finite")
        for name, vec in (("equality", ceq), ("inequality", cin)):
            bad = np.flatnonzero(~np.isfinite(vec))
            if bad.size:
                raise _NumericFailure(self._row_detail(name, bad[0], vec.size))
        for name, jac in (("equality", jac_eq), ("inequality", jac_in)):
            if jac.nnz and not np.all(np.isfinite(jac.data)):
                coo = jac.tocoo()
                bad = coo.row[np.flatnonzero(~np.isfinite(coo.data))[0]]
                raise _NumericFailure(
                    self._row_detail(name + " jacobian", bad, jac.shape[0])
                )

    def _row_detail(self, kind, row, size):
        labels = self.problem.row_labels
        if labels is not None:
            offset = 0 if kind.startswith("equality") else self.problem.n_eq
            return f"non-finite {kind} value in row {row} ({labels[offset + row]})"
        return f"non-finite {kind} value in row {row} of {size}"


def _projected_gradient_norm(x, g, lower, upper):
    return float(np.max(np.abs(x - np.clip(x - g, lower, upper)))) if x.size else 0.0


def _inner_gauss_newton(
    evaluate, problem, vs, sigma, lam, mu, x0, lb, ub, gtol, maxiter, verbose=False
):
    """Projected Gauss-Newton minimization of the augmented Lagrangian.

    The subproblem objective is sigma f - lam^T r + (mu/2) r^T r over the box,
    with r = [c_eq; c_in + s] and x = [scaled vars; slacks]. The Gauss-Newton
    Hessian mu J^T J comes from the exact sparse constraint jacobian, so the
    direction solve is immune to penalty stiffness. Along the constraint null
    space the linear objective contributes no curvature, which makes plain
    line-search globalization useless there; a Levenberg-Marquardt gain-ratio
    scheme sizes the step instead, rejecting trial points whose actual
    reduction falls short of the quadratic model's prediction. Bound-active
    components move along the damped-diagonal-scaled gradient so the two
    blocks of the direction share a common scale.
    """
    n = problem.n_vars
    m_eq = problem.n_eq
    n_in = problem.n_ineq
    x = np.clip(x0, lb, ub)
    damp = 1.0e-3
    nit = 0

    def al_value(xt):
        z = vs * xt[:n]
        f = problem.objective(z)
        ceq = problem.eq(z)
        cin = problem.ineq(z) if problem.ineq is not None else np.zeros(0)
        r = np.concatenate([ceq, cin + xt[n:]])
        if not np.isfinite(f) or not np.all(np.isfinite(r)):
            return np.inf
        return sigma * f - lam @ r + 0.5 * mu * (r @ r)

    for nit in range(1, maxiter + 1):
        f, g, ceq, jac_eq, cin, jac_in = evaluate(vs * x[:n])
        r = np.concatenate([ceq, cin + x[n:]])
        w = lam - mu * r
        gz = sigma * g - jac_eq.T @ w[:m_eq]
        if n_in:
            gz -= jac_in.T @ w[m_eq:]
        grad = np.concatenate([gz * vs, -w[m_eq:]])
        val = sigma * f - lam @ r + 0.5 * mu * (r @ r)

        pg = _projected_gradient_norm(x, grad, lb, ub)
        if verbose and (nit % 10 == 0 or nit == 1):
            rnorm = float(np.max(np.abs(r))) if r.size else 0.0
            print(
                f"    gn {nit:4d}: al={val: .8e} pg={pg:.3e} "
                f"|r|={rnorm:.3e} damp={damp:.1e}"
            )
        if pg <= gtol:
            break

        a_blk = jac_eq.multiply(vs[None, :]).tocsr()
        if n_in:
            b_blk = jac_in.multiply(vs[None, :]).tocsr()
            jhat = sp.bmat(
                [[a_blk, None], [b_blk, sp.identity(n_in, format="csr")]],
                format="csr",
            )
        else:
            jhat = a_blk
        hess = (jhat.T @ jhat).tocsc() * mu
        h_diag = np.asarray(hess.diagonal()).ravel()

        active = ((x - lb <= 1.0e-12) & (grad > 0.0)) | (
            (ub - x <= 1.0e-12) & (grad < 0.0)
        )
        free = np.flatnonzero(~active)

        stepped = False
        for _ in range(25):
            delta = mu * damp
            d = -grad / (h_diag + delta)
            if free.size:
                h_ff = hess[free][:, free] + delta * sp.identity(free.size)
                try:
                    d[free] = sp.linalg.splu(h_ff.tocsc()).solve(-grad[free])
                except RuntimeError:
                    damp *= 4.0
                    continue
            xt = np.clip(x + d, lb, ub)
            step = xt - x
            if not np.any(step):
                break
            vt = al_value(xt)
            pred = -(grad @ step + 0.5 * (step @ (hess @ step)))
            actual = val - vt
            if np.isfinite(vt) and actual > 0.0 and (
                pred <= 0.0 or actual >= 1.0e-4 * pred
            ):
                x, val, stepped = xt, vt, True
                ratio = actual / pred if pred > 0.0 else 1.0
                if ratio >= 0.75:
                    damp = max(damp / 3.0, 1.0e-12)
                elif ratio <= 0.25:
                    damp *= 2.0
                break
            damp *= 4.0
        if not stepped:
            break
    return x, nit


def solve(
    problem: NlpProblem,
    z0: np.ndarray,
    options: Optional[SolverOptions] = None,
    multipliers: Optional[tuple] = None,
    penalty_start: Optional[float] = None,
) -> SolveResult:
    """Solve the NLP from z0; optional (lambda_eq, lambda_ineq) warm start.

    penalty_start overrides the initial penalty, letting a caller that warm
    starts from a neighboring solve skip the early ramp during which a small
    penalty would let the objective pull the iterate off the feasible set.
    """
    opts = options or SolverOptions()
    t_start = time.perf_counter()

    vs = problem.var_scales if problem.var_scales is not None else np.ones(problem.n_vars)
    sigma = problem.obj_scale
    evaluate = _Evaluator(problem)
    n_in = problem.n_ineq

    y = np.asarray(z0, dtype=float) / vs
    y_lo, y_hi = problem.lower / vs, problem.upper / vs
    y = np.clip(y, y_lo, y_hi)

    if multipliers is not None:
        lam_eq = np.array(multipliers[0], dtype=float)
        lam_in = np.array(multipliers[1], dtype=float)
    else:
        lam_eq = np.zeros(problem.n_eq)
        lam_in = np.zeros(n_in)

    try:
        f, g, ceq, jac_eq, cin, jac_in = evaluate(vs * y)
    except _NumericFailure as exc:
        return SolveResult(
            z=vs * y, objective=np.nan, kkt_residual=np.inf,
            constraint_violation=np.inf, iterations=0, status="numeric_failure",
            multipliers_eq=lam_eq, multipliers_ineq=lam_in,
            message=f"initial point: {exc.detail}",
        )
    s = np.maximum(0.0, -cin)

    mu = opts.penalty_init
    if penalty_start is not None:
        mu = float(np.clip(penalty_start, opts.penalty_init, opts.penalty_max))
    gtol_floor = 0.5 * opts.tol_kkt
    gtol_k = opts.init_tol_gradient

    bounds = scipy.optimize.Bounds(
        np.concatenate([y_lo, np.zeros(n_in)]),
        np.concatenate([y_hi, np.full(n_in, np.inf)]),
    )

    def al_fun(x):
        yv, sv = x[: problem.n_vars], x[problem.n_vars :]
        f, g, ceq, jac_eq, cin, jac_in = evaluate(vs * yv)
        r = np.concatenate([ceq, cin + sv])
        lam = np.concatenate([lam_eq, lam_in])
        val = sigma * f - lam @ r + 0.5 * mu * (r @ r)
        w = lam - mu * r
        gz = sigma * g - jac_eq.T @ w[: problem.n_eq]
        if n_in:
            gz -= jac_in.T @ w[problem.n_eq :]
        grad = np.concatenate([gz * vs, -w[problem.n_eq :]])
        if not np.isfinite(val) or not np.all(np.isfinite(grad)):
            raise _NumericFailure("augmented Lagrangian value or gradient not finite")
        return val, grad

    best = None
    status = "max_iterations"
    message = ""
    kkt = np.inf
    viol = np.inf
    feas_prev = np.inf
    viol_hist = []
    k = 0

    for k in range(1, opts.max_iterations + 1):
        x0 = np.concatenate([y, s])
        try:
            if opts.inner_solver == "gauss_newton":
                x_new, nit = _inner_gauss_newton(
                    evaluate, problem, vs, sigma,
                    np.concatenate([lam_eq, lam_in]), mu,
                    x0, bounds.lb, bounds.ub, gtol_k,
                    opts.inner_max_iterations, verbose=opts.verbosity >= 2,
                )
            elif opts.inner_solver == "lbfgsb":
                res = scipy.optimize.minimize(
                    al_fun, x0, jac=True, method="L-BFGS-B", bounds=bounds,
                    options={
                        "maxiter": opts.inner_max_iterations,
                        "maxcor": opts.inner_memory,
                        "ftol": opts.inner_ftol,
                        "gtol": gtol_k,
                        "maxfun": 3 * opts.inner_max_iterations,
                    },
                )
                x_new, nit = res.x, res.nit
            else:
                raise ValueError(f"unknown inner solver {opts.inner_solver!r}")
        except _NumericFailure as exc:
            status, message = "numeric_failure", exc.detail
            break
        y, s = x_new[: problem.n_vars], x_new[problem.n_vars :]

        f, g, ceq, jac_eq, cin, jac_in = evaluate(vs * y)
        r = np.concatenate([ceq, cin + s])
        feas = float(np.max(np.abs(r))) if r.size else 0.0
        viol = max(
            float(np.max(np.abs(ceq))) if ceq.size else 0.0,
            float(np.max(cin)) if cin.size else 0.0,
        )
        _, al_grad = al_fun(x_new)
        kkt = _projected_gradient_norm(x_new, al_grad, bounds.lb, bounds.ub)

        if opts.verbosity:
            print(
                f"  al iter {k:3d}: f={f: .6e} viol={viol:.3e} kkt={kkt:.3e} "
                f"mu={mu:.1e} inner_it={nit}"
            )

        if best is None or (viol, sigma * f) < (best[0], best[1]):
            best = (viol, sigma * f, y.copy(), s.copy(), lam_eq.copy(), lam_in.copy(), kkt)

        if viol <= opts.tol_constraint and kkt <= opts.tol_kkt:
            lam_eq = lam_eq - mu * ceq
            lam_in = np.minimum(0.0, lam_in - mu * (cin + s))
            status = "converged"
            break

        viol_hist.append(viol)
        if (
            opts.stall_window
            and len(viol_hist) > opts.stall_window
            and min(viol_hist[-opts.stall_window :])
            > 0.99 * min(viol_hist[: -opts.stall_window])
        ):
            message = f"feasibility plateaued near {viol:.3e}"
            break

        inner_ok = nit < opts.inner_max_iterations or kkt <= 10.0 * gtol_k
        if inner_ok:
            lam_eq = np.clip(
                lam_eq - mu * ceq, -opts.multiplier_max, opts.multiplier_max
            )
            lam_in = np.clip(
                np.minimum(0.0, lam_in - mu * (cin + s)), -opts.multiplier_max, 0.0
            )
            # grow the penalty only while actually infeasible; once inside the
            # constraint tolerance, stiffening just amplifies the noise the
            # residuals feed back into the multiplier updates
            if viol > opts.tol_constraint and feas > opts.progress_ratio * feas_prev:
                mu = min(mu * opts.penalty_growth, opts.penalty_max)
            gtol_k = max(0.5 * gtol_k, gtol_floor)
        # an unsolved subproblem justifies neither a first-order multiplier
        # step nor a stiffer penalty; the next outer resumes it warm instead
        feas_prev = feas

    if status != "converged" and best is not None and status != "numeric_failure":
        _, _, y, s, lam_eq, lam_in, kkt = best
        f, g, ceq, jac_eq, cin, jac_in = evaluate(vs * y)
        viol = max(
            float(np.max(np.abs(ceq))) if ceq.size else 0.0,
            float(np.max(cin)) if cin.size else 0.0,
        )

    z = vs * y
    return SolveResult(
        z=z,
        objective=problem.objective(z),
        kkt_residual=float(kkt),
        constraint_violation=float(viol),
        iterations=k,
        status=status,
        multipliers_eq=lam_eq,
        multipliers_ineq=lam_in,
        message=message,
        inner_evals=evaluate.count,
        wall_time=time.perf_counter() - t_start,
        penalty_final=mu,
    )


def kkt_report(
    problem: NlpProblem, z: np.ndarray, multipliers: tuple
) -> KktReport:
    """Stationarity, feasibility, complementarity at (z, multipliers).

    Stationarity is the infinity norm of the projected Lagrangian gradient in
    the solver's scaled variables; feasibility the worst row-scaled violation;
    complementarity the worst |lambda_i * c_i| over inequalities.
    """
    vs = problem.var_scales if problem.var_scales is not None else np.ones(problem.n_vars)
    lam_eq, lam_in = (np.asarray(m, dtype=float) for m in multipliers)
    z = np.asarray(z, dtype=float)

    g = problem.gradient(z) * problem.obj_scale
    ceq = problem.eq(z)
    gz = g - problem.eq_jac(z).T @ lam_eq
    if problem.ineq is not None and lam_in.size:
        cin = problem.ineq(z)
        gz -= problem.ineq_jac(z).T @ lam_in
        comp = float(np.max(np.abs(lam_in * cin)))
        viol_in = float(np.max(cin))
    else:
        comp = 0.0
        viol_in = -np.inf

    y = z / vs
    stat = _projected_gradient_norm(y, gz * vs, problem.lower / vs, problem.upper / vs)
    feas = max(float(np.max(np.abs(ceq))) if ceq.size else 0.0, viol_in, 0.0)
    return KktReport(stationarity=stat, primal_feasibility=feas, complementarity=comp)


def solve_with_scipy(
    problem: NlpProblem,
    z0: np.ndarray,
    method: str = "SLSQP",
    max_iterations: int = 300,
) -> SolveResult:
    """Adapter running the same NLP through a scipy constrained solver.

    Exists so results never depend on one solver implementation: anything the
    augmented Lagrangian produces can be cross-checked against an independent
    SQP. Dense Jacobians, so keep this to small node counts.
    """
    t_start = time.perf_counter()
    vs = problem.var_scales if problem.var_scales is not None else np.ones(problem.n_vars)
    sigma = problem.obj_scale

    def fun(y):
        return sigma * problem.objective(vs * y)

    def grad(y):
        return sigma * problem.gradient(vs * y) * vs

    constraints = [
        {
            "type": "eq",
            "fun": lambda y: problem.eq(vs * y),
            "jac": lambda y: problem.eq_jac(vs * y).toarray() * vs,
        }
    ]
    if problem.ineq is not None:
        constraints.append(
            {
                "type": "ineq",
                "fun": lambda y: -problem.ineq(vs * y),
                "jac": lambda y: -problem.ineq_jac(vs * y).toarray() * vs,
            }
        )
    res = scipy.optimize.minimize(
        fun,
        np.asarray(z0, dtype=float) / vs,
        jac=grad,
        method=method,
        bounds=scipy.optimize.Bounds(problem.lower / vs, problem.upper / vs),
        constraints=constraints,
        options={"maxiter": max_iterations, "ftol": 1e-12},
    )
    z = vs * res.x
    ceq = problem.eq(z)
    viol = float(np.max(np.abs(ceq))) if ceq.size else 0.0
    if problem.ineq is not None:
        viol = max(viol, float(np.max(problem.ineq(z))))
    return SolveResult(
        z=z,
        objective=problem.objective(z),
        kkt_residual=np.nan,
        constraint_violation=viol,
        iterations=int(res.nit),
        status="converged" if res.success else "max_iterations",
        multipliers_eq=np.zeros(problem.n_eq),
        multipliers_ineq=np.zeros(problem.n_ineq),
        message=str(res.message),
        wall_time=time.perf_counter() - t_start,
    )
