"""
Minimal lifts: min over c of D(w + Q c), Q an orthonormal basis of K.

Smooth D runs damped Newton on D^2/2, polyhedral D a pair of linear
programs, anything else subgradient steps with a Polyak step. Every solve
closes with an annihilator certificate: a v in K-perp with F(v) = 1 bounds
every lift from below by <w, v>, and the gap is D(lift) - <w, v>.

The support of V*/K at a vector of K-perp is maximized over quotient
coordinates with the lift solver as the class norm, so the dual embedding
is measured through the quotient and not through F* itself.
"""
import math
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, minimize

from core.errors import InputError, NumericError

logger = logging.getLogger(__name__)

NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-12
NEWTON_ACCEPT = 1e-9
ARMIJO = 0.25
BACKTRACK = 0.5
HESSIAN_RIDGE = 1e-14
SUBGRADIENT_MAX_ITER = 10_000
SUBGRADIENT_GAP_TOL = 1e-6
LP_METHOD = "highs"
SUPPORT_GRAD_TOL = 1e-7
SUPPORT_MAX_ITER = 200
CUT_MAX_ITER = 200
CUT_GAP_TOL = 1e-8
# box of the cutting-plane programs, in units of the widest sampled class
CUT_BOX = 1e3


@dataclass
class LiftResult:
    lift: np.ndarray
    value: float
    lower_bound: float
    certificate: np.ndarray
    iterations: int
    method: str

    @property
    def gap(self) -> float:
        return self.value - self.lower_bound

    def diagnostics(self) -> dict:
        return {"method": self.method, "value": self.value, "lower_bound": self.lower_bound, "gap": self.gap,
                "iterations": self.iterations}


def certificate(inst, w: np.ndarray, direction) -> tuple[float, np.ndarray]:
    """Lower bound <w, v> from direction projected onto K-perp and scaled to F(v) = 1."""
    v = inst.project_annihilator(direction)
    scale = float(inst.norm.evaluate(v)) if np.any(v) else 0.0
    if scale <= 0.0:
        return 0.0, np.zeros(inst.n)
    v = v / scale
    bound = float(w @ v)
    if bound < 0.0:
        return 0.0, np.zeros(inst.n)
    return bound, v


def _trivial(inst, w: np.ndarray) -> LiftResult | None:
    if inst.k == inst.n or not np.any(w):
        return LiftResult(np.zeros(inst.n), 0.0, 0.0, np.zeros(inst.n), 0, "trivial")
    if inst.k == 0:
        value = inst.dual.value(w)
        if inst.dual.is_polyhedral:
            bound, v = _unit_ball_lp(inst.norm, w)
        else:
            bound, v = certificate(inst, w, inst.dual.subgradient(w))
        return LiftResult(w.copy(), value, bound, v, 0, "trivial")
    return None


def _keep_contraction(inst, w: np.ndarray, result: LiftResult) -> LiftResult:
    """The representative is a lift too; never report more than D(w)."""
    start = inst.dual.value(w)
    if result.value > start:
        logger.debug("instance %s: solver lift above D(w) by %.3g, keeping w", inst.id, result.value - start)
        result.lift, result.value = w.copy(), start
    return result


def solve_newton(inst, w: np.ndarray) -> LiftResult:
    """Damped Newton with Armijo backtracking on phi(c) = D(w + Q c)^2 / 2."""
    dual, q = inst.dual, inst.subspace
    c = np.zeros(inst.k)
    z = w.copy()
    phi = 0.5 * dual.value(z) ** 2
    grad = q.T @ dual.grad_half_sq(z)
    tol = NEWTON_TOL * max(1.0, float(np.linalg.norm(w)))
    iteration = 0
    for iteration in range(1, NEWTON_MAX_ITER + 1):
        if float(np.linalg.norm(grad)) <= tol:
            break
        hess = q.T @ dual.hess_half_sq(z) @ q + HESSIAN_RIDGE * np.eye(inst.k)
        direction = -np.linalg.solve(hess, grad)
        slope = float(grad @ direction)
        step = 1.0
        while True:
            cand = c + step * direction
            phi_cand = 0.5 * dual.value(w + q @ cand) ** 2
            if phi_cand <= phi + ARMIJO * step * slope or step < 1e-12:
                break
            step *= BACKTRACK
        if phi_cand > phi:
            break
        c, phi = cand, phi_cand
        z = w + q @ c
        grad = q.T @ dual.grad_half_sq(z)
    residual = float(np.linalg.norm(grad))
    value = dual.value(z)
    bound, v = certificate(inst, w, dual.grad_half_sq(z))
    result = LiftResult(z, value, bound, v, iteration, "newton")
    if residual > NEWTON_ACCEPT * max(1.0, float(np.linalg.norm(w))):
        raise NumericError("Newton minimal lift did not converge",
                           diagnostics={**result.diagnostics(), "residual": residual})
    return result


def _unit_ball_lp(norm, objective: np.ndarray, equality: np.ndarray | None = None):
    """max <objective, x> over the unit ball of a weighted l1 or l-inf norm, optionally with equality @ x = 0."""
    n = norm.dim
    weights = norm.weights
    if norm.p == math.inf:
        bounds = [(-1.0 / wi, 1.0 / wi) for wi in weights]
        res = linprog(-objective, A_eq=equality, b_eq=None if equality is None else np.zeros(len(equality)),
                      bounds=bounds, method=LP_METHOD)
        x = res.x
    else:
        # x = plus - minus with sum w (plus + minus) <= 1
        a_ub = np.concatenate([weights, weights])[None, :]
        a_eq = None if equality is None else np.hstack([equality, -equality])
        res = linprog(-np.concatenate([objective, -objective]), A_ub=a_ub, b_ub=[1.0], A_eq=a_eq,
                      b_eq=None if equality is None else np.zeros(len(equality)),
                      bounds=[(0.0, None)] * (2 * n), method=LP_METHOD)
        x = None if res.x is None else res.x[:n] - res.x[n:]
    if res.status != 0:
        raise NumericError("unit-ball linear program failed", diagnostics={"status": int(res.status),
                                                                           "message": res.message})
    return -float(res.fun), np.asarray(x, dtype=float)


def solve_polyhedral(inst, w: np.ndarray) -> LiftResult:
    """
    Exact minimal lift for weighted l1 / l-inf duals.

    The primal program minimizes D over the coset; the certificate is the
    dual program, max <w, v> over v in K-perp with F(v) <= 1.
    """
    dual_norm = inst.dual.as_norm
    n, k = inst.n, inst.k
    q = inst.subspace
    d = dual_norm.weights
    if dual_norm.p == math.inf:
        # variables (c, t): min t with |d_i z_i| <= t
        a_ub = np.vstack([np.hstack([d[:, None] * q, -np.ones((n, 1))]),
                          np.hstack([-d[:, None] * q, -np.ones((n, 1))])])
        b_ub = np.concatenate([-d * w, d * w])
        cost = np.concatenate([np.zeros(k), [1.0]])
        bounds = [(None, None)] * k + [(0.0, None)]
    else:
        # variables (c, s): min sum d_i s_i with |z_i| <= s_i
        a_ub = np.vstack([np.hstack([q, -np.eye(n)]), np.hstack([-q, -np.eye(n)])])
        b_ub = np.concatenate([-w, w])
        cost = np.concatenate([np.zeros(k), d])
        bounds = [(None, None)] * k + [(0.0, None)] * n
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method=LP_METHOD)
    if res.status != 0:
        raise NumericError("minimal-lift linear program failed",
                           diagnostics={"status": int(res.status), "message": res.message})
    z = w + q @ res.x[:k]
    bound, v = _unit_ball_lp(inst.norm, w, inst.basis)
    scale = float(inst.norm.evaluate(v))
    if scale > 1.0:
        v, bound = v / scale, bound / scale
    return LiftResult(z, inst.dual.value(z), bound, v, int(getattr(res, "nit", 0)), "linprog")


def solve_subgradient(inst, w: np.ndarray, max_iter: int = SUBGRADIENT_MAX_ITER,
                      tol: float = SUBGRADIENT_GAP_TOL) -> LiftResult:
    """
    Subgradient steps on the coset with a Polyak step aimed at the best certified lower bound.

    Raises:
        NumericError: the gap is above tol after max_iter steps
    """
    dual, q = inst.dual, inst.subspace
    c = np.zeros(inst.k)
    best_value, best_c = math.inf, c
    lower, cert = 0.0, np.zeros(inst.n)
    iteration = 0
    for iteration in range(1, max_iter + 1):
        z = w + q @ c
        value = dual.value(z)
        sub = dual.subgradient(z)
        bound, v = certificate(inst, w, sub)
        if bound > lower:
            lower, cert = bound, v
        if value < best_value:
            best_value, best_c = value, c
        g = q.T @ sub
        if best_value - lower <= tol * max(1.0, best_value) or not np.any(g):
            break
        c = c - (value - lower) / float(g @ g) * g
    result = LiftResult(w + q @ best_c, best_value, lower, cert, iteration, "subgradient")
    if result.gap > tol * max(1.0, best_value):
        raise NumericError("subgradient minimal lift did not reach the gap tolerance", diagnostics=result.diagnostics())
    return result


def minimal_lift_solve(inst, w, method: str = "auto") -> LiftResult:
    """
    Minimal lift of the class w + K.

    Args:
        inst: QuotientInstance
        w: Representative covector
        method: "auto", "newton", "linprog" or "subgradient"

    Returns:
        LiftResult with value <= D(w)
    """
    w = np.asarray(w, dtype=float)
    trivial = _trivial(inst, w)
    if trivial is not None:
        return trivial
    dual = inst.dual
    if method == "auto":
        method = "linprog" if dual.is_polyhedral else "newton" if dual.is_smooth else "subgradient"
    if method == "linprog":
        result = solve_polyhedral(inst, w)
    elif method == "newton":
        try:
            result = solve_newton(inst, w)
        except NumericError as e:
            logger.warning("instance %s: Newton failed (%s), falling back to subgradient steps", inst.id, e)
            result = solve_subgradient(inst, w)
    elif method == "subgradient":
        result = solve_subgradient(inst, w)
    else:
        raise InputError(f"unknown lift method '{method}'")
    return _keep_contraction(inst, w, result)



@dataclass
class SupportResult:
    value: float
    coordinates: np.ndarray
    residual: float
    evaluations: int
    method: str

    def diagnostics(self) -> dict:
        return {"method": self.method, "value": self.value, "residual": self.residual,
                "evaluations": self.evaluations}


class _ClassNorm:
    """
    N(c) = class norm of A c, A the orthonormal basis of K-perp read as covectors.

    Each call runs minimal_lift_solve; the lift certificate v gives the
    supporting functional A^T v of N at c.
    """

    def __init__(self, inst):
        self.inst = inst
        self.basis = inst.annihilator
        self.evaluations = 0

    def __call__(self, c) -> tuple[float, np.ndarray]:
        self.evaluations += 1
        result = minimal_lift_solve(self.inst, self.basis @ np.asarray(c, dtype=float))
        return result.value, self.basis.T @ result.certificate


def _support_line(class_norm: _ClassNorm, u: np.ndarray) -> SupportResult:
    c = np.array([math.copysign(1.0, u[0])])
    value, _ = class_norm(c)
    if value <= 0.0:
        raise NumericError("class norm vanishes on a nonzero class", diagnostics={"class_norm": value})
    return SupportResult(abs(float(u[0])) / value, c / value, 0.0, class_norm.evaluations, "line")


def _support_smooth(class_norm: _ClassNorm, u: np.ndarray) -> SupportResult:
    """BFGS on N(c)^2/2 - <c, u>; the minimizer has N(c) = sup <c, u> / N(c)."""
    scale = float(np.linalg.norm(u))

    def objective(c):
        value, slope = class_norm(c)
        return 0.5 * value * value - float(c @ u), value * slope - u

    start_value, _ = class_norm(u)
    start = u * scale * scale / start_value ** 2
    res = minimize(objective, start, jac=True, method="BFGS",
                   options={"gtol": 1e-3 * SUPPORT_GRAD_TOL * scale, "maxiter": SUPPORT_MAX_ITER})
    c = res.x
    value, slope = class_norm(c)
    residual = float(np.linalg.norm(value * slope - u)) / scale
    diagnostics = {"class_norm": value, "residual": residual, "evaluations": class_norm.evaluations,
                   "message": str(res.message)}
    if value <= 0.0 or residual > SUPPORT_GRAD_TOL:
        raise NumericError("quotient support maximization did not converge", diagnostics=diagnostics)
    return SupportResult(float(c @ u) / value, c / value, residual, class_norm.evaluations, "bfgs")


def _support_cutting_planes(class_norm: _ClassNorm, u: np.ndarray, max_iter: int = CUT_MAX_ITER,
                            tol: float = CUT_GAP_TOL) -> SupportResult:
    """
    Kelley cutting planes: max <c, u> subject to <c, s> <= 1 for every supporting functional s seen so far.

    The program value bounds the support from above and every evaluated
    class bounds it from below; the result is the best lower bound.
    """
    m = len(u)
    starts = np.vstack([np.eye(m), -np.eye(m), u[None, :] / float(np.linalg.norm(u))])
    cuts, lower, best, extent = [], 0.0, np.zeros(m), 0.0

    def visit(c):
        nonlocal lower, best, extent
        value, slope = class_norm(c)
        cuts.append(slope)
        if value > 0.0:
            extent = max(extent, float(np.linalg.norm(c)) / value)
            if float(c @ u) / value > lower:
                lower, best = float(c @ u) / value, c / value

    for c in starts:
        visit(c)
    box = CUT_BOX * extent
    upper = math.inf
    for _ in range(max_iter):
        res = linprog(-u, A_ub=np.array(cuts), b_ub=np.ones(len(cuts)), bounds=[(-box, box)] * m, method=LP_METHOD)
        if res.status != 0:
            raise NumericError("cutting-plane program failed", diagnostics={"status": int(res.status),
                                                                            "message": res.message})
        upper = min(upper, -float(res.fun))
        if upper - lower <= tol * upper:
            break
        visit(np.asarray(res.x, dtype=float))
    residual = (upper - lower) / upper if upper > 0 else 0.0
    if residual > tol:
        raise NumericError("cutting planes did not close the support gap",
                           diagnostics={"lower": lower, "upper": upper, "evaluations": class_norm.evaluations})
    return SupportResult(lower, best, residual, class_norm.evaluations, "cutting_planes")


def quotient_support(inst, v) -> SupportResult:
    """
    sup{<w, v> : class_norm(w + K) <= 1} for v in K-perp.

    Classes are parametrized by c in R^(n-k) through w = A c. The pairing
    with v is then <c, A^T v>, and the class norm of every trial class comes
    from minimal_lift_solve. One coordinate is solved exactly, smooth duals
    by BFGS, anything else by cutting planes.

    Raises:
        NumericError: the lift solver or the maximization failed
    """
    v = np.asarray(v, dtype=float)
    m = inst.n - inst.k
    if m == 0 or not np.any(v):
        return SupportResult(0.0, np.zeros(m), 0.0, 0, "trivial")
    class_norm = _ClassNorm(inst)
    u = inst.annihilator.T @ v
    if m == 1:
        result = _support_line(class_norm, u)
    elif inst.dual.is_smooth:
        result = _support_smooth(class_norm, u)
    else:
        result = _support_cutting_planes(class_norm, u)
    logger.debug("instance %s: quotient support %.12g by %s after %d class norms", inst.id, result.value,
                 result.method, result.evaluations)
    return result
