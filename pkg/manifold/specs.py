"""
Built-in manifolds with Riemannian or Finsler structure.

Points and tangent vectors are stored in ambient coordinates: R^n for the
flat kinds and the Finsler plane, R^3 for the sphere. Every method accepts a
single point (shape (a,)) or a stack (shape (m, a)) and broadcasts.
"""
import math
import logging

import numpy as np
from scipy.spatial.transform import Rotation
from scipy.stats import qmc

from core.errors import InputError
from minkowski.norms import MinkowskiNorm, euclidean, quartic_blend, quartic_blend_value, quartic_blend_grad_half_sq

logger = logging.getLogger(__name__)

METRIC_STEP = 1e-5


def halton_points(dim: int, n: int, seed: int) -> np.ndarray:
    """Scrambled Halton points in [0, 1)^dim."""
    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    return sampler.random(n)


def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = np.pi * (1.0 + math.sqrt(5.0)) * i
    rho = np.sqrt(1.0 - z * z)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


class Manifold:
    """Common interface; subclasses override the closed forms they have."""
    kind = "abstract"
    intrinsic_dim = 0
    ambient_dim = 0
    is_riemannian = False
    has_closed_form_log = False
    periodic = False
    # exp and chart geometry are the same at every point
    homogeneous = False

    # -- metric -------------------------------------------------------------

    def finsler(self, x, v) -> np.ndarray:
        raise NotImplementedError

    def frame(self, x) -> np.ndarray:
        """Linear frame I_x: R^n -> T_x M as an (ambient, intrinsic) matrix."""
        return np.eye(self.ambient_dim, self.intrinsic_dim)

    def frame_norm(self, x) -> MinkowskiNorm:
        """The norm u -> F(x, I_x u) on frame coordinates."""
        raise NotImplementedError

    def geodesic_rhs(self, x, v) -> np.ndarray:
        """Acceleration of the geodesic through (x, v)."""
        raise NotImplementedError

    # -- point-level maps ---------------------------------------------------

    def project(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)

    def contains(self, x, tol: float = 1e-6) -> bool:
        x = np.asarray(x, dtype=float)
        return x.shape[-1] == self.ambient_dim and bool(np.all(np.isfinite(x)))

    def displacement(self, x, y) -> np.ndarray:
        """Coordinate difference y - x used for neighbour search and chart segments."""
        return np.asarray(y, dtype=float) - np.asarray(x, dtype=float)

    def exp(self, x, v) -> np.ndarray:
        from manifold.geodesics import geodesic_shoot_batch, DEFAULT_EXP_STEPS
        return geodesic_shoot_batch(self, x, v, 1.0, DEFAULT_EXP_STEPS)

    def log(self, x, y) -> np.ndarray:
        from manifold.geodesics import shooting_log
        return shooting_log(self, x, y)

    def distance(self, x, y) -> np.ndarray:
        """Manifold distance for nearby points, F(x, log_x y)."""
        return self.finsler(x, self.log(x, y))

    def segment(self, p, q, s: np.ndarray):
        """Points and velocities of the straight chart segment from p to q at parameters s."""
        p = np.asarray(p, dtype=float)
        delta = self.displacement(p, q)
        s = np.asarray(s, dtype=float)
        points = p[..., None, :] + s[:, None] * delta[..., None, :]
        velocity = np.broadcast_to(delta[..., None, :], points.shape)
        return self.project(points), velocity

    # -- sampling -----------------------------------------------------------

    def sample_uniform(self, n: int, seed: int) -> np.ndarray:
        raise NotImplementedError

    def area_element(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.ones(x.shape[:-1])

    @property
    def injectivity_hint(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class EuclideanSpace(Manifold):
    """R^dim with a constant Minkowski norm; sampled on an axis-aligned box."""
    kind = "euclidean"
    has_closed_form_log = True
    homogeneous = True

    def __init__(self, norm: MinkowskiNorm, domain=None, norm_name: str | None = None):
        self.norm = norm
        self.norm_name = norm_name
        self.intrinsic_dim = self.ambient_dim = norm.dim
        domain = [[0.0, 1.0]] * norm.dim if domain is None else domain
        self.domain = np.asarray(domain, dtype=float)
        if self.domain.shape != (norm.dim, 2) or np.any(self.domain[:, 1] <= self.domain[:, 0]):
            raise InputError("euclidean domain must be one [low, high] pair per dimension")
        self.is_riemannian = norm.is_inner_product_family

    def finsler(self, x, v):
        return self.norm.evaluate(v)

    def frame_norm(self, x):
        return self.norm

    def geodesic_rhs(self, x, v):
        return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(v)))

    def exp(self, x, v):
        return np.asarray(x, dtype=float) + np.asarray(v, dtype=float)

    def log(self, x, y):
        return self.displacement(x, y)

    def distance(self, x, y):
        return self.norm.evaluate(self.displacement(x, y))

    def sample_uniform(self, n, seed):
        low, high = self.domain[:, 0], self.domain[:, 1]
        return low + halton_points(self.ambient_dim, n, seed) * (high - low)

    @property
    def injectivity_hint(self):
        return float(np.linalg.norm(self.domain[:, 1] - self.domain[:, 0]))

    def to_dict(self):
        return {"kind": self.kind, "dim": self.ambient_dim,
                "norm": self.norm_name or self.norm.to_dict(), "domain": self.domain.tolist()}


class Sphere2(Manifold):
    """Round sphere of a given radius embedded in R^3."""
    kind = "sphere2"
    intrinsic_dim = 2
    ambient_dim = 3
    is_riemannian = True
    has_closed_form_log = True
    homogeneous = True

    def __init__(self, radius: float = 1.0):
        if radius <= 0:
            raise InputError(f"sphere radius must be positive, got {radius}")
        self.radius = float(radius)

    def finsler(self, x, v):
        v = np.asarray(v, dtype=float)
        return np.sqrt(np.sum(v * v, axis=-1))

    def frame(self, x):
        x = np.asarray(x, dtype=float)
        n = x / np.linalg.norm(x)
        a = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
        t1 = a - (a @ n) * n
        t1 /= np.linalg.norm(t1)
        t2 = np.cross(n, t1)
        return np.stack([t1, t2], axis=1)

    def frame_norm(self, x):
        return euclidean(2)

    def geodesic_rhs(self, x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        speed_sq = np.sum(v * v, axis=-1, keepdims=True)
        return -speed_sq * x / self.radius ** 2

    def project(self, x):
        x = np.asarray(x, dtype=float)
        return self.radius * x / np.linalg.norm(x, axis=-1, keepdims=True)

    def contains(self, x, tol=1e-6):
        x = np.asarray(x, dtype=float)
        return x.shape[-1] == 3 and bool(np.all(np.abs(np.linalg.norm(x, axis=-1) - self.radius) <= tol * self.radius))

    def exp(self, x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        speed = np.linalg.norm(v, axis=-1, keepdims=True)
        angle = speed / self.radius
        safe = np.where(speed > 0, speed, 1.0)
        out = np.cos(angle) * x + self.radius * np.sin(angle) * v / safe
        return np.where(speed > 0, out, x + 0.0 * v)

    def _angle(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        cross = np.linalg.norm(np.cross(x, y), axis=-1)
        dot = np.sum(x * y, axis=-1)
        return np.arctan2(cross, dot)

    def log(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        xn = x / self.radius
        yn = y / self.radius
        angle = self._angle(xn, yn)[..., None]
        u = yn - np.sum(xn * yn, axis=-1, keepdims=True) * xn
        u_norm = np.linalg.norm(u, axis=-1, keepdims=True)
        safe = np.where(u_norm > 0, u_norm, 1.0)
        return np.where(u_norm > 0, self.radius * angle * u / safe, 0.0 * u)

    def distance(self, x, y):
        return self.radius * self._angle(x, y)

    def segment(self, p, q, s):
        p = np.asarray(p, dtype=float)
        delta = np.asarray(q, dtype=float) - p
        s = np.asarray(s, dtype=float)
        chord = p[..., None, :] + s[:, None] * delta[..., None, :]
        length = np.linalg.norm(chord, axis=-1, keepdims=True)
        unit = chord / length
        d = delta[..., None, :]
        velocity = self.radius * (d - np.sum(unit * d, axis=-1, keepdims=True) * unit) / length
        return self.radius * unit, velocity

    def sample_uniform(self, n, seed):
        rotation = Rotation.random(random_state=seed)
        return self.radius * rotation.apply(fibonacci_sphere(n))

    @property
    def injectivity_hint(self):
        return 0.5 * math.pi * self.radius

    def to_dict(self):
        return {"kind": self.kind, "radius": self.radius}


class FlatTorus2(Manifold):
    """R^2 modulo a rectangular lattice with a periodic metric field."""
    kind = "flat_torus2"
    intrinsic_dim = 2
    ambient_dim = 2
    is_riemannian = True
    periodic = True

    def __init__(self, periods=(1.0, 1.0), metric_field: dict | None = None):
        self.periods = np.asarray(periods, dtype=float)
        if self.periods.shape != (2,) or np.any(self.periods <= 0):
            raise InputError("torus periods must be two positive numbers")
        self.metric_spec = dict(metric_field or {"kind": "constant"})
        kind = self.metric_spec.get("kind", "constant")
        if kind == "constant":
            matrix = np.asarray(self.metric_spec.get("matrix", np.eye(2)), dtype=float)
            if matrix.shape != (2, 2) or not np.allclose(matrix, matrix.T) or np.linalg.eigvalsh(matrix).min() <= 0:
                raise InputError("torus metric matrix must be 2x2 symmetric positive definite")
            self._matrix = matrix
            self.has_closed_form_log = True
            self.homogeneous = True
        elif kind == "conformal_wave":
            self._amplitude = float(self.metric_spec.get("amplitude", 0.3))
            if not 0.0 <= self._amplitude < 1.0:
                raise InputError("conformal_wave amplitude must lie in [0, 1)")
            self.has_closed_form_log = False
        else:
            raise InputError(f"unknown torus metric field '{kind}'")
        self._kind = kind

    def metric(self, x) -> np.ndarray:
        """Metric matrices G(x), shape (..., 2, 2)."""
        x = np.asarray(x, dtype=float)
        if self._kind == "constant":
            return np.broadcast_to(self._matrix, x.shape[:-1] + (2, 2))
        phase = 2.0 * np.pi * x / self.periods
        factor = 1.0 + self._amplitude * np.sin(phase[..., 0]) * np.sin(phase[..., 1])
        return factor[..., None, None] * np.eye(2)

    def finsler(self, x, v):
        v = np.asarray(v, dtype=float)
        g = self.metric(np.broadcast_to(x, np.broadcast_shapes(np.shape(x), v.shape)))
        return np.sqrt(np.maximum(np.einsum("...i,...ij,...j->...", v, g, v), 0.0))

    def frame(self, x):
        lower = np.linalg.cholesky(self.metric(np.asarray(x, dtype=float)))
        return np.linalg.inv(lower).T

    def frame_norm(self, x):
        return euclidean(2)

    def geodesic_rhs(self, x, v):
        from manifold.geodesics import riemannian_acceleration
        if self._kind == "constant":
            return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(v)))
        return riemannian_acceleration(self.metric, x, v, METRIC_STEP)

    def project(self, x):
        return np.mod(np.asarray(x, dtype=float), self.periods)

    def displacement(self, x, y):
        d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        return d - self.periods * np.round(d / self.periods)

    def exp(self, x, v):
        if self._kind == "constant":
            return self.project(np.asarray(x, dtype=float) + np.asarray(v, dtype=float))
        return super().exp(x, v)

    def log(self, x, y):
        if self._kind != "constant":
            return super().log(x, y)
        base = self.displacement(x, y)
        best = base
        best_len = self.finsler(x, base)
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                if i == 0 and j == 0:
                    continue
                cand = base + self.periods * np.array([i, j])
                length = self.finsler(x, cand)
                better = length < best_len
                best = np.where(better[..., None], cand, best)
                best_len = np.where(better, length, best_len)
        return best

    def distance(self, x, y):
        return self.finsler(x, self.log(x, y))

    def sample_uniform(self, n, seed):
        return halton_points(2, n, seed) * self.periods

    def area_element(self, x):
        return np.sqrt(np.linalg.det(self.metric(np.asarray(x, dtype=float))))

    @property
    def injectivity_hint(self):
        if self._kind == "constant":
            return 0.5 * float(np.min(self.periods)) * math.sqrt(float(np.linalg.eigvalsh(self._matrix).min()))
        return 0.5 * float(np.min(self.periods)) * math.sqrt(1.0 - self._amplitude)

    def to_dict(self):
        return {"kind": self.kind, "periods": self.periods.tolist(), "metric_field": self.metric_spec}


class FinslerPlane(Manifold):
    """
    R^2 with a quartic-blend norm whose blend parameter varies in space:
    theta(x) = base + amplitude * sin(k x_1) * cos(k x_2).
    """
    kind = "finsler_plane"
    intrinsic_dim = 2
    ambient_dim = 2
    is_riemannian = False

    def __init__(self, field: dict | None = None, domain=None):
        self.field = dict(field or {})
        family = self.field.get("family", "quartic_blend")
        if family != "quartic_blend":
            raise InputError(f"finsler_plane supports the quartic_blend field only, got '{family}'")
        self.base = float(self.field.get("theta_base", 0.4))
        self.amplitude = float(self.field.get("theta_amplitude", 0.2))
        self.wavenumber = float(self.field.get("wavenumber", 3.0))
        if self.base - abs(self.amplitude) < 0.0 or self.base + abs(self.amplitude) >= 1.0:
            raise InputError("finsler_plane blend parameter must stay inside [0, 1)")
        domain = [[0.0, 1.0], [0.0, 1.0]] if domain is None else domain
        self.domain = np.asarray(domain, dtype=float)

    def theta(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k = self.wavenumber
        return self.base + self.amplitude * np.sin(k * x[..., 0]) * np.cos(k * x[..., 1])

    def finsler(self, x, v):
        v = np.asarray(v, dtype=float)
        x = np.broadcast_to(np.asarray(x, dtype=float), np.broadcast_shapes(np.shape(x), v.shape))
        return quartic_blend_value(v, self.theta(x))

    def momentum(self, x, v) -> np.ndarray:
        """Gradient in v of F(x, v)^2 / 2."""
        v = np.asarray(v, dtype=float)
        x = np.broadcast_to(np.asarray(x, dtype=float), np.broadcast_shapes(np.shape(x), v.shape))
        return quartic_blend_grad_half_sq(v, self.theta(x))

    def frame_norm(self, x):
        return quartic_blend(2, float(self.theta(x)))

    def geodesic_rhs(self, x, v):
        from manifold.geodesics import euler_lagrange_acceleration
        return euler_lagrange_acceleration(self, x, v)

    def sample_uniform(self, n, seed):
        low, high = self.domain[:, 0], self.domain[:, 1]
        return low + halton_points(2, n, seed) * (high - low)

    @property
    def injectivity_hint(self):
        return 1.0

    def to_dict(self):
        return {"kind": self.kind, "field": self.field, "domain": self.domain.tolist()}
