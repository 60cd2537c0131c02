"""
Dual norms F*(w) = sup{<w, v> : F(v) <= 1}.

The sampling route warm-starts on a grid of unit directions and refines the
best direction by projected ascent on the unit sphere; the value returned is
<w, v> for a v with F(v) = 1, so it never exceeds the true dual norm.
"""
import math
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from core.errors import InputError, NumericError
from minkowski.norms import MinkowskiNorm, custom_table, euclidean, weighted_lp

logger = logging.getLogger(__name__)

WARM_START_SAMPLES = 4096
ASCENT_STEPS = 100
RESIDUAL_TOL = 1e-6
RESIDUAL_PROBE = 1e-6
NEWTON_MAX_ITER = 60
NEWTON_TOL = 1e-14


@dataclass
class DualNormResult:
    value: float
    maximizer: np.ndarray
    residual: float
    iterations: int
    method: str


def unit_directions(dim: int, count: int = WARM_START_SAMPLES, seed: int = 0) -> np.ndarray:
    """Deterministic unit directions: angle grid (2D), Fibonacci sphere (3D), seeded Gaussians above."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    if dim == 3:
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        phi = np.pi * (1.0 + math.sqrt(5.0)) * i
        rho = np.sqrt(1.0 - z * z)
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _pattern(dim: int) -> np.ndarray:
    dirs = [np.eye(dim), -np.eye(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    d = np.zeros(dim)
                    d[i], d[j] = si, sj
                    dirs.append(d[None, :] / math.sqrt(2.0))
    return np.vstack(dirs)


def _ratio(norm: MinkowskiNorm, omega: np.ndarray, u: np.ndarray) -> np.ndarray:
    return (u @ omega) / norm.evaluate(u)


def dual_norm_ascent(norm: MinkowskiNorm, omega, seed: int = 0) -> DualNormResult:
    """Warm-started projected ascent for sup <w, v> over the unit F-sphere."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (norm.dim,):
        raise InputError(f"covector of shape {omega.shape} does not match norm dimension {norm.dim}")
    if not np.any(omega):
        return DualNormResult(0.0, np.zeros(norm.dim), 0.0, 0, "ascent")
    dirs = unit_directions(norm.dim, seed=seed)
    f_dirs = norm.evaluate(dirs)
    if np.any(f_dirs <= 0):
        raise InputError("dual norm needs a positive definite norm")
    values = (dirs @ omega) / f_dirs
    best = int(np.argmax(values))
    u, h = dirs[best], float(values[best])

    if norm.dim == 1:
        return DualNormResult(h, u / f_dirs[best], 0.0, 0, "ascent")

    if norm.dim == 2:
        # one angle parametrizes the sphere; Brent refinement inside the winning cell
        spacing = 2.0 * np.pi / len(dirs)
        t0 = math.atan2(u[1], u[0])
        res = minimize_scalar(
            lambda t: -float(_ratio(norm, omega, np.array([math.cos(t), math.sin(t)]))),
            bounds=(t0 - 2.0 * spacing, t0 + 2.0 * spacing), method="bounded",
            options={"xatol": 1e-13, "maxiter": ASCENT_STEPS},
        )
        cand = np.array([math.cos(res.x), math.sin(res.x)])
        h_cand = float(_ratio(norm, omega, cand))
        if h_cand > h:
            u, h = cand, h_cand
        iterations = int(res.nfev)
        step = spacing
    else:
        pattern = _pattern(norm.dim)
        step = 2.0 * math.sqrt(4.0 * np.pi / len(dirs)) if norm.dim == 3 else 0.25
        iterations = 0
        for iterations in range(1, ASCENT_STEPS + 1):
            grad = np.empty(norm.dim)
            eps = 1e-7
            for i in range(norm.dim):
                e = np.zeros(norm.dim)
                e[i] = eps
                grad[i] = (_ratio(norm, omega, u + e) - _ratio(norm, omega, u - e)) / (2.0 * eps)
            tangent = grad - (grad @ u) * u
            moves = pattern
            if np.linalg.norm(tangent) > 0:
                moves = np.vstack([tangent / np.linalg.norm(tangent), pattern])
            cands = u + step * moves
            cands /= np.linalg.norm(cands, axis=1, keepdims=True)
            vals = _ratio(norm, omega, cands)
            k = int(np.argmax(vals))
            if vals[k] > h:
                u, h = cands[k], float(vals[k])
                step = min(step * 1.5, 0.5)
            else:
                step *= 0.5
            if step < 1e-13:
                break

    probes = _pattern(norm.dim)
    cands = u + RESIDUAL_PROBE * probes
    cands /= np.linalg.norm(cands, axis=1, keepdims=True)
    residual = max(0.0, float(np.max(_ratio(norm, omega, cands))) - h)
    if residual >= RESIDUAL_TOL:
        raise NumericError(
            "dual norm ascent did not converge",
            diagnostics={"value": h, "residual": residual, "iterations": iterations, "final_step": step},
        )
    v = u / float(norm.evaluate(u))
    return DualNormResult(float(omega @ v), v, residual, iterations, "ascent")


def dual_norm_newton(norm: MinkowskiNorm, omega) -> DualNormResult:
    """Damped Newton on <w, v> - F(v)^2/2; the maximizer v* has F(v*) = F*(w)."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (norm.dim,):
        raise InputError(f"covector of shape {omega.shape} does not match norm dimension {norm.dim}")
    if not np.any(omega):
        return DualNormResult(0.0, np.zeros(norm.dim), 0.0, 0, "newton")
    if not norm.is_smooth:
        raise InputError(f"Newton dual needs a smooth norm, got family '{norm.family}'")

    def objective(v):
        return float(omega @ v) - 0.5 * float(norm.evaluate(v)) ** 2

    v = omega / max(float(norm.evaluate(omega)), 1e-300) * float(np.linalg.norm(omega))
    q = objective(v)
    grad = omega - norm.grad_half_sq(v)
    iteration = 0
    for iteration in range(1, NEWTON_MAX_ITER + 1):
        hess = norm.hess_half_sq(v) + 1e-14 * np.eye(norm.dim)
        direction = np.linalg.solve(hess, grad)
        step = 1.0
        while True:
            cand = v + step * direction
            q_cand = objective(cand)
            if q_cand >= q + 0.25 * step * float(grad @ direction) or step < 1e-12:
                break
            step *= 0.5
        v, q = cand, q_cand
        grad = omega - norm.grad_half_sq(v)
        if float(np.linalg.norm(grad)) <= NEWTON_TOL * max(1.0, float(np.linalg.norm(omega))):
            break
    fv = float(norm.evaluate(v))
    if fv <= 0 or not np.isfinite(fv):
        raise NumericError("Newton dual norm failed", diagnostics={"iterations": iteration})
    residual = float(np.linalg.norm(grad))
    if residual > 1e-8 * max(1.0, float(np.linalg.norm(omega))):
        raise NumericError("Newton dual norm did not converge",
                           diagnostics={"residual": residual, "iterations": iteration})
    return DualNormResult(float(omega @ v) / fv, v / fv, residual, iteration, "newton")


def closed_form_dual(norm: MinkowskiNorm) -> MinkowskiNorm | None:
    """Analytic dual for the euclidean and weighted_lp families, None otherwise."""
    if norm.family == "euclidean":
        return euclidean(norm.dim, np.linalg.inv(norm.gram))
    if norm.family == "weighted_lp":
        p, w = norm.p, norm.weights
        if p == 1.0:
            return weighted_lp(norm.dim, "inf", 1.0 / w)
        if p == math.inf:
            return weighted_lp(norm.dim, 1.0, 1.0 / w)
        return weighted_lp(norm.dim, p / (p - 1.0), w ** (-1.0 / (p - 1.0)))
    return None


def dual_norm(norm: MinkowskiNorm, omega, method: str = "auto", seed: int = 0) -> float:
    """
    Dual norm of a covector.

    Args:
        norm: Primal norm F
        omega: Covector of length norm.dim
        method: "auto" (closed form, then Newton for smooth norms, then ascent),
            "ascent", "newton" or "closed_form"

    Returns:
        F*(omega)
    """
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (norm.dim,):
        raise InputError(f"covector of shape {omega.shape} does not match norm dimension {norm.dim}")
    if method in ("auto", "closed_form"):
        dual = closed_form_dual(norm)
        if dual is not None:
            return float(dual.evaluate(omega)) if np.any(omega) else 0.0
        if method == "closed_form":
            raise InputError(f"no closed-form dual for family '{norm.family}'")
        method = "newton" if norm.is_smooth else "ascent"
    if method == "newton":
        return dual_norm_newton(norm, omega).value
    if method == "ascent":
        return dual_norm_ascent(norm, omega, seed=seed).value
    raise InputError(f"unknown dual norm method '{method}'")


def dual_table_norm(norm: MinkowskiNorm, nodes: int = 2048, method: str = "auto") -> MinkowskiNorm:
    """Realize the dual of a 2D norm as a custom_table norm."""
    if norm.dim != 2:
        raise InputError("table-backed duals are available in dimension 2 only")
    angles = 2.0 * np.pi * np.arange(nodes) / nodes
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    dual = closed_form_dual(norm) if method in ("auto", "closed_form") else None
    if dual is not None:
        values = dual.evaluate(dirs)
    else:
        values = np.array([dual_norm(norm, d, method=method) for d in dirs])
    logger.debug("tabulated dual of %s norm on %d nodes", norm.family, nodes)
    return custom_table(values=values, reversible=norm.reversible)
