"""Sequential quadratic programming over box bounds and inequality constraints.

The engine follows the classic recipe: linearize the constraints, build a
damped-BFGS quadratic model of the Lagrangian, solve the resulting QP with a
primal active-set method, then take a Wolfe line-search step on an l1 exact
penalty merit function.  Constraints use the g(w) >= 0 feasible convention
throughout.  Built for low-dimensional problems whose constraints are
expensive, piecewise-linear, and only available as black boxes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LineSearchError

_ELASTIC_PENALTY = 1e4
_HESSIAN_EIG_FLOOR = 1e-8


@dataclass
class SqpSettings:
    """Tunables for the SQP iteration.

    `fd_step` is relative: the per-coordinate step is fd_step * max(1, |w_i|).
    It defaults deliberately coarse (1e-4) so finite differences average
    across the kinks of piecewise-linear constraints instead of landing inside
    one facet of machine-epsilon width.
    """

    fd_step: float = 1e-4
    tol_objective: float = 1e-10
    tol_step: float = 1e-8
    tol_violation: float = 1e-6
    max_iterations: int = 200
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    hessian: str = "bfgs"  # "bfgs" | "finite-difference"
    stall_iterations: int = 5

    def __post_init__(self):
        if not 0 < self.wolfe_c1 < self.wolfe_c2 < 1:
            raise ValueError("need 0 < c1 < c2 < 1")
        for name in ("fd_step", "tol_objective", "tol_step", "tol_violation"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.hessian not in ("bfgs", "finite-difference"):
            raise ValueError(f"unknown hessian mode {self.hessian!r}")


@dataclass
class NlpProblem:
    """Minimize `objective` over a box subject to inequality constraints g_j(w) >= 0."""

    dim: int
    objective: callable
    constraints: list = field(default_factory=list)
    lower: np.ndarray = None
    upper: np.ndarray = None
    objective_gradient: callable = None
    constraint_gradients: list = None

    def __post_init__(self):
        self.lower = (
            np.full(self.dim, -np.inf)
            if self.lower is None
            else np.broadcast_to(np.asarray(self.lower, dtype=float), (self.dim,)).copy()
        )
        self.upper = (
            np.full(self.dim, np.inf)
            if self.upper is None
            else np.broadcast_to(np.asarray(self.upper, dtype=float), (self.dim,)).copy()
        )
        if np.any(self.lower > self.upper):
            raise ValueError("lower bounds exceed upper bounds")
        if self.constraint_gradients is not None and len(self.constraint_gradients) != len(
            self.constraints
        ):
            raise ValueError("constraint_gradients must match constraints")


@dataclass
class IterationRecord:
    iteration: int
    objective: float
    max_violation: float
    step_norm: float
    merit_before: float
    merit_after: float
    penalty: float
    hessian_min_eig: float
    w: np.ndarray


@dataclass
class SqpResult:
    w: np.ndarray
    objective: float
    constraint_values: np.ndarray
    status: str  # converged | max_iter | infeasible_start_unrepaired | line_search_failed
    iterations: int
    trace: list


def fd_gradient(f, w, settings: SqpSettings = None, lower=None, upper=None) -> np.ndarray:
    """Central-difference gradient, one-sided against box boundaries."""
    settings = settings or SqpSettings()
    w = np.asarray(w, dtype=float)
    n = w.size
    lo = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    hi = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    grad = np.zeros(n)
    for i in range(n):
        h = settings.fd_step * max(1.0, abs(w[i]))
        up_ok = w[i] + h <= hi[i]
        down_ok = w[i] - h >= lo[i]
        wp = w.copy()
        wm = w.copy()
        if up_ok and down_ok:
            wp[i] += h
            wm[i] -= h
            denom = 2 * h
        elif up_ok:
            wp[i] += h
            denom = h
        elif down_ok:
            wm[i] -= h
            denom = h
        else:  # box thinner than the step: shrink to fit
            h = max((hi[i] - lo[i]) / 2, 0.0)
            if h == 0:
                continue
            wp[i] = min(w[i] + h, hi[i])
            wm[i] = max(w[i] - h, lo[i])
            denom = wp[i] - wm[i]
        fp, fm = f(wp), f(wm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ValueError(f"non-finite function value probing coordinate {i}")
        grad[i] = (fp - fm) / denom
    return grad


# ---------------------------------------------------------------------------
# QP subproblem (primal active set)
# ---------------------------------------------------------------------------

@dataclass
class QpStep:
    h: np.ndarray
    multipliers: np.ndarray  # one per linearized constraint row, >= 0 when active
    relaxed: bool            # True when the linearization needed elastic slack


def _active_set_qp(H, g, G, d, x0, max_iter=None):
    """Minimize 0.5 x'Hx + g'x s.t. Gx >= d from a feasible x0.

    H must be positive definite.  Returns (x, multipliers) with multipliers
    aligned to the rows of G (zero for inactive rows).
    """
    n = H.shape[0]
    m = G.shape[0]
    x = np.asarray(x0, dtype=float).copy()
    work: list[int] = []
    lam_full = np.zeros(m)
    if max_iter is None:
        max_iter = 25 * (m + n + 1)

    for _ in range(max_iter):
        nw = len(work)
        kkt = np.zeros((n + nw, n + nw))
        kkt[:n, :n] = H
        if nw:
            gw = G[work]
            kkt[:n, n:] = -gw.T
            kkt[n:, :n] = gw
        rhs = np.zeros(n + nw)
        rhs[:n] = -(H @ x + g)
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        p = sol[:n]
        lam_w = sol[n:]

        if np.linalg.norm(p) <= 1e-11 * max(1.0, np.linalg.norm(x)):
            lam_full[:] = 0.0
            lam_full[work] = lam_w
            if nw == 0 or lam_w.min() >= -1e-9:
                return x, lam_full
            work.pop(int(np.argmin(lam_w)))
            continue

        # Largest step along p not leaving the feasible region.
        alpha = 1.0
        blocker = -1
        slack = G @ x - d
        descent = G @ p
        for j in range(m):
            if j in work or descent[j] >= -1e-13:
                continue
            a_j = slack[j] / -descent[j]
            if a_j < alpha - 1e-13:
                alpha = max(a_j, 0.0)
                blocker = j
        x = x + alpha * p
        if blocker >= 0:
            work.append(blocker)
        # alpha == 1 with no blocker: minimizer on this working set reached;
        # the next round yields p ~ 0 and checks multipliers.

    lam_full[:] = 0.0
    lam_full[work] = np.maximum(lam_w, 0.0) if len(work) else 0.0
    return x, lam_full  # iteration cap: best-effort point


def solve_qp_subproblem(H, grad, constraint_rows, constraint_values, lower, upper,
                        trust_radius=None, elastic_penalty=None) -> QpStep:
    """One SQP direction: min 0.5 h'Hh + grad'h s.t. A h + b >= 0 and bounds on h.

    `constraint_rows` is the (m, n) matrix of constraint gradients, and
    `constraint_values` the constraint values b at the current iterate, so the
    linearized feasible set is {h : A h + b >= 0, lower <= h <= upper}.  When
    h = 0 violates the linearization, the row is relaxed with elastic slack at
    a large penalty and the step flags `relaxed`.  The penalty must dominate
    the problem's multiplier scale or the relaxed QP will trade slack for
    objective; callers with scale information should pass it explicitly.
    """
    H = np.asarray(H, dtype=float)
    grad = np.asarray(grad, dtype=float)
    n = grad.size
    A = np.asarray(constraint_rows, dtype=float).reshape(-1, n)
    b = np.asarray(constraint_values, dtype=float).reshape(-1)
    m = A.shape[0]
    lo = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float).copy()
    hi = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float).copy()
    if trust_radius is not None:
        lo = np.maximum(lo, -trust_radius)
        hi = np.minimum(hi, trust_radius)
    if np.any(lo > 1e-12) or np.any(hi < -1e-12):
        raise ValueError("h = 0 must lie within the step bounds")
    lo = np.minimum(lo, 0.0)
    hi = np.maximum(hi, 0.0)

    box_rows = np.vstack([np.eye(n), -np.eye(n)])
    box_d = np.concatenate([lo, -hi])
    finite = np.isfinite(box_d)
    box_rows, box_d = box_rows[finite], box_d[finite]

    if m == 0 or b.min() >= 0:
        G = np.vstack([A, box_rows]) if m else box_rows
        d = np.concatenate([-b, box_d]) if m else box_d
        x, lam = _active_set_qp(H, grad, G, d, np.zeros(n))
        return QpStep(h=x, multipliers=lam[:m], relaxed=False)

    # Elastic relaxation: one slack per linearized row, s >= 0, penalized.
    penalty = _ELASTIC_PENALTY if elastic_penalty is None else elastic_penalty
    dim = n + m
    H_l = np.zeros((dim, dim))
    H_l[:n, :n] = H
    H_l[n:, n:] = 1e-6 * np.eye(m)
    g_l = np.concatenate([grad, np.full(m, penalty)])
    rows = [np.hstack([A, np.eye(m)]),
            np.hstack([np.zeros((m, n)), np.eye(m)]),
            np.hstack([box_rows, np.zeros((box_rows.shape[0], m))])]
    G = np.vstack(rows)
    d = np.concatenate([-b, np.zeros(m), box_d])
    x0 = np.concatenate([np.zeros(n), np.maximum(-b, 0.0)])
    x, lam = _active_set_qp(H_l, g_l, G, d, x0)
    slack = x[n:]
    return QpStep(h=x[:n], multipliers=lam[:m], relaxed=bool(slack.max() > 1e-8))


# ---------------------------------------------------------------------------
# Wolfe line search on the merit function
# ---------------------------------------------------------------------------

def wolfe_line_search(merit, w_k, h_k, settings: SqpSettings = None) -> float:
    """Step size in (0, 1] satisfying sufficient decrease and curvature.

    Derivatives along the ray are estimated by finite differences, so the
    curvature condition is checked in the strong form; if no step satisfies it
    within 30 trials (common on piecewise-linear merits) the search falls back
    to plain Armijo backtracking.
    """
    settings = settings or SqpSettings()
    c1, c2 = settings.wolfe_c1, settings.wolfe_c2
    w_k = np.asarray(w_k, dtype=float)
    h_k = np.asarray(h_k, dtype=float)

    def phi(t):
        return float(merit(w_k + t * h_k))

    dt = 1e-7

    def dphi(t):
        a = max(t - dt, 0.0)
        b = min(t + dt, 1.0)
        return (phi(b) - phi(a)) / (b - a)

    phi0 = phi(0.0)
    d0 = (phi(dt) - phi0) / dt
    if not np.isfinite(phi0) or not np.isfinite(d0):
        raise LineSearchError("merit function is not finite at the current iterate")
    if d0 >= 0:
        raise LineSearchError("search direction is not a descent direction for the merit")

    def zoom(lo, hi, phi_lo, trials_left):
        for _ in range(trials_left):
            t = 0.5 * (lo + hi)
            ft = phi(t)
            if ft > phi0 + c1 * t * d0 or ft >= phi_lo:
                hi = t
            else:
                dt_ = dphi(t)
                if abs(dt_) <= -c2 * d0:
                    return t
                if dt_ * (hi - lo) >= 0:
                    hi = lo
                lo, phi_lo = t, ft
            if abs(hi - lo) < 1e-12:
                break
        return None

    t_prev, phi_prev = 0.0, phi0
    t = 1.0
    for trial in range(30):
        ft = phi(t)
        if ft > phi0 + c1 * t * d0 or (trial > 0 and ft >= phi_prev):
            found = zoom(t_prev, t, phi_prev, 30 - trial)
            if found is not None:
                return found
            break
        dt_ = dphi(t)
        if abs(dt_) <= -c2 * d0:
            return t
        if dt_ >= 0:
            found = zoom(t, t_prev, ft, 30 - trial)
            if found is not None:
                return found
            break
        if t >= 1.0:  # still descending at the full step; gamma is capped at 1
            return 1.0
        t_prev, phi_prev = t, ft
        t = min(2 * t, 1.0)

    # Armijo backtracking fallback.
    t = 1.0
    for _ in range(30):
        if phi(t) <= phi0 + c1 * t * d0:
            return t
        t *= 0.5
    raise LineSearchError("no step satisfies sufficient decrease")


# ---------------------------------------------------------------------------
# Damped BFGS
# ---------------------------------------------------------------------------

def _bfgs_update(B, s, y, floor=_HESSIAN_EIG_FLOOR):
    """Powell-damped BFGS update keeping B symmetric positive definite."""
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    Bs = B @ s
    sBs = float(s @ Bs)
    if sBs <= 1e-16 or np.linalg.norm(s) <= 1e-14:
        return B
    sy = float(s @ y)
    if sy < 0.2 * sBs:
        theta = 0.8 * sBs / (sBs - sy)
        y = theta * y + (1.0 - theta) * Bs
        sy = float(s @ y)
    if sy <= 1e-14:
        return B
    B = B - np.outer(Bs, Bs) / sBs + np.outer(y, y) / sy
    B = 0.5 * (B + B.T)
    min_eig = float(np.linalg.eigvalsh(B).min())
    if min_eig < floor:
        B = B + (floor - min_eig) * np.eye(B.shape[0])
    return B


def _fd_hessian(f, w, settings, lower, upper):
    """Forward-difference Hessian of f, symmetrized and floored to PD."""
    n = w.size
    base = fd_gradient(f, w, settings, lower, upper)
    H = np.zeros((n, n))
    for i in range(n):
        h = settings.fd_step * max(1.0, abs(w[i]))
        wp = w.copy()
        if wp[i] + h <= upper[i]:
            wp[i] += h
        else:
            wp[i] -= h
            h = -h
        gp = fd_gradient(f, wp, settings, lower, upper)
        H[i] = (gp - base) / h
    H = 0.5 * (H + H.T)
    min_eig = float(np.linalg.eigvalsh(H).min())
    if min_eig < _HESSIAN_EIG_FLOOR:
        H = H + (_HESSIAN_EIG_FLOOR - min_eig) * np.eye(n)
    return H


# ---------------------------------------------------------------------------
# Main loop
# ---------------------------------------------------------------------------

def slsqp_solve(problem: NlpProblem, w0, settings: SqpSettings = None) -> SqpResult:
    """Run the SQP iteration from w0 and return the best feasible iterate seen."""
    settings = settings or SqpSettings()
    lo, hi = problem.lower, problem.upper
    w = np.clip(np.asarray(w0, dtype=float), lo, hi)
    m = len(problem.constraints)

    def eval_constraints(x):
        return np.array([float(g(x)) for g in problem.constraints])

    def objective_grad(x):
        if problem.objective_gradient is not None:
            return np.asarray(problem.objective_gradient(x), dtype=float)
        return fd_gradient(problem.objective, x, settings, lo, hi)

    def constraint_grad(j, x):
        if problem.constraint_gradients is not None:
            gj = problem.constraint_gradients[j]
            if gj is not None:
                return np.asarray(gj(x), dtype=float)
        return fd_gradient(problem.constraints[j], x, settings, lo, hi)

    def violation(gvals):
        return float(max(0.0, -gvals.min())) if gvals.size else 0.0

    f = float(problem.objective(w))
    gvals = eval_constraints(w)
    grad_f = objective_grad(w)
    G = np.array([constraint_grad(j, w) for j in range(m)]).reshape(m, problem.dim)

    B = np.eye(problem.dim)
    trace: list[IterationRecord] = []
    consecutive_stalls = 0
    best_w, best_f = None, np.inf
    if violation(gvals) <= settings.tol_violation:
        best_w, best_f = w.copy(), f
    status = "max_iter"
    iterations = 0

    for it in range(1, settings.max_iterations + 1):
        iterations = it
        if settings.hessian == "finite-difference":
            B = _fd_hessian(problem.objective, w, settings, lo, hi)
        # Multiplier scale of whichever constraint binds first, |df|/|dg|;
        # both the elastic slack penalty and the merit penalty must dominate
        # it or either subproblem will trade feasibility for objective.
        grad_ratio = 0.0
        if m:
            row_norms = np.linalg.norm(G, axis=1)
            live = row_norms > 1e-12
            if np.any(live):
                grad_ratio = float(np.linalg.norm(grad_f) / row_norms[live].min())

        qp = solve_qp_subproblem(
            B, grad_f, G, gvals, lo - w, hi - w,
            elastic_penalty=max(_ELASTIC_PENALTY, 10.0 * grad_ratio),
        )
        h = qp.h
        if np.linalg.norm(h) <= settings.tol_step:
            status = "converged"
            break

        lam_est = max(float(np.abs(qp.multipliers).max(initial=0.0)), grad_ratio)
        rho = max(10.0, 2.0 * lam_est)

        def merit(x, _rho=None):
            r = rho if _rho is None else _rho
            gx = eval_constraints(x)
            pen = float(np.maximum(-gx, 0.0).sum()) if gx.size else 0.0
            return float(problem.objective(x)) + r * pen

        merit_before = merit(w)
        gamma = None
        for _ in range(3):
            try:
                gamma = wolfe_line_search(merit, w, h, settings)
                break
            except LineSearchError:
                rho *= 10.0
        if gamma is None:
            # No merit-descent step exists along the QP direction even after
            # penalty escalation.  At a feasible iterate that is first-order
            # stationarity within finite-difference accuracy (the nonsmooth
            # constraint boundary admits no improving direction), so report
            # convergence; at an infeasible iterate it is a genuine failure.
            feasible_now = violation(gvals) <= settings.tol_violation
            status = "converged" if (feasible_now and best_w is not None) \
                else "line_search_failed"
            break

        w_new = np.clip(w + gamma * h, lo, hi)
        f_new = float(problem.objective(w_new))
        g_new = eval_constraints(w_new)
        grad_f_new = objective_grad(w_new)
        G_new = np.array([constraint_grad(j, w_new) for j in range(m)]).reshape(m, problem.dim)

        if settings.hessian == "bfgs":
            s = w_new - w
            lam = qp.multipliers
            y = (grad_f_new - G_new.T @ lam) - (grad_f - G.T @ lam)
            B = _bfgs_update(B, s, y)
        min_eig = float(np.linalg.eigvalsh(B).min())

        viol_new = violation(g_new)
        merit_after = merit(w_new)
        step_norm = float(np.linalg.norm(w_new - w))
        trace.append(
            IterationRecord(
                iteration=it,
                objective=f_new,
                max_violation=viol_new,
                step_norm=step_norm,
                merit_before=merit_before,
                merit_after=merit_after,
                penalty=rho,
                hessian_min_eig=min_eig,
                w=w_new.copy(),
            )
        )
        if viol_new <= settings.tol_violation and f_new < best_f - 1e-15:
            best_w, best_f = w_new.copy(), f_new
        elif viol_new <= settings.tol_violation and best_w is None:
            best_w, best_f = w_new.copy(), f_new

        stalled = merit_before - merit_after <= settings.tol_objective * max(
            1.0, abs(merit_before)
        )
        consecutive_stalls = consecutive_stalls + 1 if stalled else 0
        w, f, gvals, grad_f, G = w_new, f_new, g_new, grad_f_new, G_new

        if step_norm <= settings.tol_step:
            status = "converged"
            break
        if consecutive_stalls >= settings.stall_iterations:
            # Piecewise-linear plateau: the merit cannot improve further.
            status = "converged"
            break

    if best_w is None:
        final_w = w
        status = "infeasible_start_unrepaired"
        final_f = f
        final_g = gvals
    else:
        final_w = best_w
        final_f = best_f
        final_g = eval_constraints(best_w)
    return SqpResult(
        w=final_w,
        objective=final_f,
        constraint_values=final_g,
        status=status,
        iterations=iterations,
        trace=trace,
    )
