"""
Geodesic integration.

Riemannian kinds integrate x'' = -Gamma(x)[x', x'] with Christoffel symbols
from central differences of the metric. The Finsler plane integrates the
Euler-Lagrange system of L = F^2/2:

    L_vv x'' = L_x - L_vx x'

with the analytic momentum L_v and finite differences for the rest.
Both use a fixed-step classical Runge-Kutta scheme.
"""
import logging

import numpy as np

from core.errors import InputError, NumericError

logger = logging.getLogger(__name__)

CHRISTOFFEL_STEP = 1e-5
LAGRANGIAN_STEP = 1e-6
MIN_STEPS = 16
DEFAULT_STEPS = 64
DEFAULT_EXP_STEPS = 32
BLOWUP_BOUND = 1e8
SHOOTING_MAX_ITER = 12
SHOOTING_TOL = 1e-11
SHOOTING_STEP = 1e-6


def christoffel_symbols(metric, x, h: float = CHRISTOFFEL_STEP) -> np.ndarray:
    """
    Gamma^i_jk at a stack of points, shape (m, n, n, n).

    Args:
        metric: Callable returning metric matrices of shape (..., n, n)
        x: Points, shape (m, n)
        h: Central-difference step
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[-1]
    g_inv = np.linalg.inv(metric(x))
    # dg[m, l, i, j] = d_l g_ij
    dg = np.empty(x.shape[:-1] + (n, n, n))
    for l in range(n):
        e = np.zeros(n)
        e[l] = h
        dg[..., l, :, :] = (metric(x + e) - metric(x - e)) / (2.0 * h)
    # first kind: Gamma_ljk = (d_j g_lk + d_k g_lj - d_l g_jk) / 2
    first = 0.5 * (np.einsum("...jlk->...ljk", dg) + np.einsum("...klj->...ljk", dg) - dg)
    return np.einsum("...il,...ljk->...ijk", g_inv, first)


def riemannian_acceleration(metric, x, v, h: float = CHRISTOFFEL_STEP) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    shape = np.broadcast_shapes(x.shape, v.shape)
    xs = np.broadcast_to(x, shape).reshape(-1, shape[-1])
    vs = np.broadcast_to(v, shape).reshape(-1, shape[-1])
    gamma = christoffel_symbols(metric, xs, h)
    return -np.einsum("mijk,mj,mk->mi", gamma, vs, vs).reshape(shape)


def euler_lagrange_acceleration(manifold, x, v, h: float = LAGRANGIAN_STEP) -> np.ndarray:
    """Acceleration from the Euler-Lagrange equations of F^2/2; manifold must expose momentum()."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    shape = np.broadcast_shapes(x.shape, v.shape)
    xs = np.broadcast_to(x, shape).reshape(-1, shape[-1])
    vs = np.broadcast_to(v, shape).reshape(-1, shape[-1])
    m, n = xs.shape
    scale = np.maximum(1.0, np.linalg.norm(vs, axis=1))[:, None]

    def lagrangian(px, pv):
        return 0.5 * manifold.finsler(px, pv) ** 2

    l_vv = np.empty((m, n, n))
    l_x = np.empty((m, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        hv = h * scale
        l_vv[:, :, j] = (manifold.momentum(xs, vs + hv * e) - manifold.momentum(xs, vs - hv * e)) / (2.0 * hv)
        l_x[:, j] = (lagrangian(xs + h * e, vs) - lagrangian(xs - h * e, vs)) / (2.0 * h)
    # directional derivative of the momentum in x along the velocity
    step = h / scale
    l_vx_v = (manifold.momentum(xs + step * vs, vs) - manifold.momentum(xs - step * vs, vs)) / (2.0 * step)
    l_vv = 0.5 * (l_vv + np.swapaxes(l_vv, 1, 2))
    moving = np.linalg.norm(vs, axis=1) > 0
    acc = np.zeros((m, n))
    if np.any(moving):
        rhs = l_x[moving] - l_vx_v[moving]
        acc[moving] = np.linalg.solve(l_vv[moving], rhs[..., None])[..., 0]
    return acc.reshape(shape)


def rk4_integrate(rhs, x0, v0, t: float, steps: int, bound: float = BLOWUP_BOUND, record: bool = False):
    """
    Classical Runge-Kutta on the first-order system (x, v)' = (v, rhs(x, v)).

    Returns the final (x, v), or the full trajectory stacks when record is set.
    """
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    dt = t / steps
    xs, vs = [x], [v]
    for step in range(steps):
        k1x, k1v = v, rhs(x, v)
        k2x, k2v = v + 0.5 * dt * k1v, rhs(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v)
        k3x, k3v = v + 0.5 * dt * k2v, rhs(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v)
        k4x, k4v = v + dt * k3v, rhs(x + dt * k3x, v + dt * k3v)
        dx = dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        dv = dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        size = max(float(np.max(np.abs(dx), initial=0.0)), float(np.max(np.abs(dv), initial=0.0)))
        if not np.all(np.isfinite(dx)) or not np.all(np.isfinite(dv)) or size > bound:
            raise NumericError(
                "geodesic integration blew up",
                diagnostics={"step": step, "step_norm": size, "bound": bound, "dt": dt},
            )
        x, v = x + dx, v + dv
        if record:
            xs.append(x)
            vs.append(v)
    if record:
        return np.stack(xs), np.stack(vs)
    return x, v


def _check_shoot(manifold, x, steps):
    if steps < MIN_STEPS:
        raise InputError(f"geodesic integration needs at least {MIN_STEPS} steps, got {steps}")
    if not manifold.contains(x):
        raise InputError(f"point {np.asarray(x).tolist()} is not on the {manifold.kind} manifold")


def geodesic_shoot_batch(manifold, x, v, t: float, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """gamma_t for a stack of initial data, without the on-manifold check."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    shape = np.broadcast_shapes(x.shape, v.shape)
    x_end, _ = rk4_integrate(manifold.geodesic_rhs, np.broadcast_to(x, shape), np.broadcast_to(v, shape), t, steps)
    return manifold.project(x_end)


def geodesic_shoot(manifold, x, v, t: float = 1.0, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """
    Integrate the geodesic with initial point x and velocity v up to time t.

    Args:
        manifold: Manifold kind
        x: Start point on the manifold
        v: Initial velocity (tangent at x)
        t: Final time
        steps: Fixed RK4 step count (>= 16)

    Returns:
        gamma_t, projected back onto the manifold
    """
    _check_shoot(manifold, x, steps)
    return geodesic_shoot_batch(manifold, x, v, t, steps)


def speed_profile(manifold, x, v, t: float = 1.0, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """F(gamma_s, gamma_s') at each integrator node s in [0, t]."""
    _check_shoot(manifold, x, steps)
    xs, vs = rk4_integrate(manifold.geodesic_rhs, x, v, t, steps, record=True)
    return manifold.finsler(xs, vs)


def exp_map(manifold, x, v) -> np.ndarray:
    """exp_x(v): closed form where the kind has one, integrator otherwise."""
    if not manifold.contains(x):
        raise InputError(f"point {np.asarray(x).tolist()} is not on the {manifold.kind} manifold")
    return manifold.exp(x, v)


def shooting_log(manifold, x, y, v0=None, max_iter: int = SHOOTING_MAX_ITER, tol: float = SHOOTING_TOL) -> np.ndarray:
    """
    Batched Newton shooting for v with exp_x(v) = y.

    The Jacobian of exp_x is taken by central differences; the residual uses
    manifold.displacement so periodic kinds compare minimal images.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape)
    xs = np.broadcast_to(x, shape).reshape(-1, shape[-1])
    ys = np.broadcast_to(y, shape).reshape(-1, shape[-1])
    n = xs.shape[1]
    v = manifold.displacement(xs, ys) if v0 is None else np.broadcast_to(v0, shape).reshape(-1, n).copy()
    residual = manifold.displacement(manifold.exp(xs, v), ys)
    for iteration in range(max_iter):
        err = np.max(np.abs(residual), axis=1)
        active = err > tol * np.maximum(1.0, np.abs(ys).max(axis=1))
        if not np.any(active):
            break
        xa, va = xs[active], v[active]
        jac = np.empty((len(xa), n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = SHOOTING_STEP
            plus = manifold.exp(xa, va + e)
            minus = manifold.exp(xa, va - e)
            jac[:, :, j] = manifold.displacement(minus, plus) / (2.0 * SHOOTING_STEP)
        v[active] = va + np.linalg.solve(jac, residual[active][..., None])[..., 0]
        residual = manifold.displacement(manifold.exp(xs, v), ys)
    else:
        worst = float(np.max(np.abs(residual)))
        if worst > 1e-6:
            raise NumericError("shooting for the logarithm did not converge",
                               diagnostics={"residual": worst, "iterations": max_iter})
    logger.debug("shooting log on %d pairs finished, max residual %.3g", len(xs), float(np.max(np.abs(residual))))
    return v.reshape(shape)
