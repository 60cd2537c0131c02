"""
Minkowski norm families on a single fiber.

Families:
    euclidean      sqrt(v^T G v), G SPD (identity when omitted)
    weighted_lp    (sum w_i |v_i|^p)^(1/p), p in [1, inf]
    quartic_blend  ((1-theta)|v|^4 + theta * sum v_i^4)^(1/4), theta in [0, 1]
    custom_table   |v| * T(angle(v)), T tabulated on a uniform angle grid (dim 2)
"""
import math
from dataclasses import dataclass, field

import numpy as np

from core.errors import InputError

FAMILIES = ("euclidean", "weighted_lp", "quartic_blend", "custom_table")

# Named angular profiles for custom_table norms given without explicit values
TABLE_PROFILES = {
    "unit": lambda t: np.ones_like(t),
    "abs_cos": lambda t: np.abs(np.cos(t)),
}
DEFAULT_TABLE_NODES = 720


def quartic_blend_value(v: np.ndarray, theta) -> np.ndarray:
    """F for the quartic blend; theta may broadcast against v[..., 0]."""
    v = np.asarray(v, dtype=float)
    sq = np.sum(v * v, axis=-1)
    phi = (1.0 - theta) * sq * sq + theta * np.sum(v ** 4, axis=-1)
    return np.sqrt(np.sqrt(np.maximum(phi, 0.0)))


def quartic_blend_grad_half_sq(v: np.ndarray, theta) -> np.ndarray:
    """Gradient of F^2/2 for the quartic blend."""
    v = np.asarray(v, dtype=float)
    theta = np.asarray(theta, dtype=float)
    sq = np.sum(v * v, axis=-1)
    phi = (1.0 - theta) * sq * sq + theta * np.sum(v ** 4, axis=-1)
    root = np.sqrt(np.maximum(phi, 0.0))
    safe = np.where(root > 0, root, 1.0)
    core = (1.0 - theta)[..., None] * sq[..., None] * v + theta[..., None] * v ** 3
    return np.where((root > 0)[..., None], core / safe[..., None], 0.0)


def quartic_blend_hess_half_sq(v: np.ndarray, theta: float) -> np.ndarray:
    """Hessian of F^2/2 at a single nonzero vector."""
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    sq = float(v @ v)
    phi = (1.0 - theta) * sq * sq + theta * float(np.sum(v ** 4))
    grad_phi = 4.0 * ((1.0 - theta) * sq * v + theta * v ** 3)
    hess_phi = 4.0 * (1.0 - theta) * (sq * np.eye(n) + 2.0 * np.outer(v, v)) + 12.0 * theta * np.diag(v ** 2)
    return 0.25 * hess_phi / math.sqrt(phi) - 0.125 * np.outer(grad_phi, grad_phi) / phi ** 1.5


@dataclass(frozen=True, eq=False)
class MinkowskiNorm:
    """A norm on R^dim tagged with its family and parameters."""
    dim: int
    family: str
    params: dict = field(default_factory=dict)
    reversible: bool = True

    def __post_init__(self):
        if self.dim < 1:
            raise InputError(f"norm dimension must be positive, got {self.dim}")
        if self.family not in FAMILIES:
            raise InputError(f"unknown norm family '{self.family}'")
        getattr(self, f"_setup_{self.family}")()

    # -- family setup -------------------------------------------------------

    def _setup_euclidean(self):
        gram = self.params.get("gram")
        gram = np.eye(self.dim) if gram is None else np.asarray(gram, dtype=float)
        if gram.shape != (self.dim, self.dim):
            raise InputError(f"gram matrix must be {self.dim}x{self.dim}")
        if not np.allclose(gram, gram.T) or np.linalg.eigvalsh(gram).min() <= 0:
            raise InputError("gram matrix must be symmetric positive definite")
        object.__setattr__(self, "_gram", gram)
        object.__setattr__(self, "_identity", bool(np.array_equal(gram, np.eye(self.dim))))

    def _setup_weighted_lp(self):
        p = self.params.get("p", 2.0)
        p = math.inf if p in ("inf", math.inf) else float(p)
        if p < 1:
            raise InputError(f"weighted_lp needs p >= 1, got {p}")
        weights = self.params.get("weights")
        weights = np.ones(self.dim) if weights is None else np.asarray(weights, dtype=float)
        if weights.shape != (self.dim,) or np.any(weights <= 0):
            raise InputError("weighted_lp weights must be positive, one per coordinate")
        object.__setattr__(self, "_p", p)
        object.__setattr__(self, "_weights", weights)

    def _setup_quartic_blend(self):
        theta = float(self.params.get("theta", 0.5))
        if not 0.0 <= theta <= 1.0:
            raise InputError(f"quartic_blend theta must lie in [0, 1], got {theta}")
        object.__setattr__(self, "_theta", theta)

    def _setup_custom_table(self):
        if self.dim != 2:
            raise InputError("custom_table norms are defined on dimension 2 only")
        values = self.params.get("values")
        if values is None:
            profile = self.params.get("profile", "unit")
            if profile not in TABLE_PROFILES:
                raise InputError(f"unknown table profile '{profile}'")
            nodes = int(self.params.get("nodes", DEFAULT_TABLE_NODES))
            angles = 2.0 * np.pi * np.arange(nodes) / nodes
            values = TABLE_PROFILES[profile](angles)
            values = np.where(np.abs(values) < 1e-15, 0.0, values)
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size < 4 or np.any(values < 0):
            raise InputError("custom_table values must be a non-negative list of at least 4 entries")
        object.__setattr__(self, "_table", values)

    # -- evaluation ---------------------------------------------------------

    @property
    def p(self) -> float:
        return self._p

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def theta(self) -> float:
        return self._theta

    @property
    def gram(self) -> np.ndarray:
        return self._gram

    @property
    def table(self) -> np.ndarray:
        return self._table

    @property
    def is_smooth(self) -> bool:
        """C^1 away from the origin with a usable Hessian of F^2/2."""
        if self.family == "weighted_lp":
            return 1.0 < self._p < math.inf
        return self.family in ("euclidean", "quartic_blend")

    @property
    def is_polyhedral(self) -> bool:
        return self.family == "weighted_lp" and self._p in (1.0, math.inf)

    @property
    def is_inner_product_family(self) -> bool:
        if self.family == "euclidean":
            return True
        if self.family == "weighted_lp":
            return self._p == 2.0
        if self.family == "quartic_blend":
            return self._theta == 0.0
        return False

    def _check_dim(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1:] != (self.dim,):
            raise InputError(f"vector of length {v.shape[-1:] or 0} does not match norm dimension {self.dim}")
        return v

    def evaluate(self, v) -> np.ndarray:
        """Evaluate F on a stack of vectors with shape (..., dim)."""
        v = self._check_dim(v)
        if self.family == "euclidean":
            if self._identity:
                return np.sqrt(np.sum(v * v, axis=-1))
            return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", v, self._gram, v), 0.0))
        if self.family == "weighted_lp":
            a = np.abs(v)
            if self._p == math.inf:
                return np.max(self._weights * a, axis=-1)
            if self._p == 1.0:
                return np.sum(self._weights * a, axis=-1)
            # scale by the largest entry to keep |v|^p in range
            scale = np.max(a, axis=-1)
            safe = np.where(scale > 0, scale, 1.0)
            ratio = a / safe[..., None]
            return scale * np.sum(self._weights * ratio ** self._p, axis=-1) ** (1.0 / self._p)
        if self.family == "quartic_blend":
            return quartic_blend_value(v, self._theta)
        radius = np.sqrt(np.sum(v * v, axis=-1))
        m = self._table.size
        angle = np.mod(np.arctan2(v[..., 1], v[..., 0]), 2.0 * np.pi)
        pos = angle * m / (2.0 * np.pi)
        j = np.floor(pos).astype(int) % m
        frac = pos - np.floor(pos)
        profile = (1.0 - frac) * self._table[j] + frac * self._table[(j + 1) % m]
        return radius * profile

    def __call__(self, v) -> float:
        return eval_norm(self, v)

    def grad_half_sq(self, v) -> np.ndarray:
        """Gradient of F^2/2 on a stack of vectors; finite differences where no formula exists."""
        v = self._check_dim(v)
        if self.family == "euclidean":
            return v @ self._gram
        if self.family == "quartic_blend":
            theta = np.full(v.shape[:-1], self._theta)
            return quartic_blend_grad_half_sq(v, theta)
        if self.family == "weighted_lp" and self.is_smooth:
            value = self.evaluate(v)
            safe = np.where(value > 0, value, 1.0)
            g = (safe ** (2.0 - self._p))[..., None] * self._weights * np.abs(v) ** (self._p - 1.0) * np.sign(v)
            return np.where((value > 0)[..., None], g, 0.0)
        h = 1e-6 * np.maximum(1.0, np.sqrt(np.sum(v * v, axis=-1)))[..., None]
        grad = np.empty_like(v)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = 1.0
            grad[..., i] = 0.5 * (self.evaluate(v + h * e) ** 2 - self.evaluate(v - h * e) ** 2) / (2.0 * h[..., 0])
        return grad

    def hess_half_sq(self, v) -> np.ndarray:
        """Hessian of F^2/2 at one vector."""
        v = self._check_dim(v)
        if self.family == "euclidean":
            return self._gram.copy()
        if self.family == "quartic_blend" and np.any(v != 0):
            return quartic_blend_hess_half_sq(v, self._theta)
        h = 1e-6 * max(1.0, float(np.linalg.norm(v)))
        hess = np.empty((self.dim, self.dim))
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h
            hess[:, i] = (self.grad_half_sq(v + e) - self.grad_half_sq(v - e)) / (2.0 * h)
        return 0.5 * (hess + hess.T)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        params = {}
        if self.family == "euclidean" and not self._identity:
            params["gram"] = self._gram.tolist()
        elif self.family == "weighted_lp":
            params["p"] = "inf" if self._p == math.inf else self._p
            if not np.all(self._weights == 1.0):
                params["weights"] = self._weights.tolist()
        elif self.family == "quartic_blend":
            params["theta"] = self._theta
        elif self.family == "custom_table":
            params["values"] = self._table.tolist()
        return {"family": self.family, "dim": self.dim, "parameters": params, "reversible": self.reversible}

    @classmethod
    def from_dict(cls, doc: dict) -> "MinkowskiNorm":
        try:
            family = doc["family"]
            dim = int(doc["dim"])
        except KeyError as e:
            raise InputError(f"norm spec missing key {e.args[0]!r}") from e
        return cls(dim=dim, family=family, params=dict(doc.get("parameters", {})),
                   reversible=bool(doc.get("reversible", True)))


def euclidean(dim: int, gram=None) -> MinkowskiNorm:
    return MinkowskiNorm(dim, "euclidean", {} if gram is None else {"gram": np.asarray(gram).tolist()})


def weighted_lp(dim: int, p, weights=None) -> MinkowskiNorm:
    params = {"p": p}
    if weights is not None:
        params["weights"] = np.asarray(weights, dtype=float).tolist()
    return MinkowskiNorm(dim, "weighted_lp", params)


def quartic_blend(dim: int, theta: float) -> MinkowskiNorm:
    return MinkowskiNorm(dim, "quartic_blend", {"theta": theta})


def custom_table(values=None, profile: str | None = None, nodes: int = DEFAULT_TABLE_NODES,
                 reversible: bool = True) -> MinkowskiNorm:
    if values is not None:
        return MinkowskiNorm(2, "custom_table", {"values": np.asarray(values, dtype=float).tolist()}, reversible)
    return MinkowskiNorm(2, "custom_table", {"profile": profile or "unit", "nodes": nodes}, reversible)


def eval_norm(norm: MinkowskiNorm, v) -> float:
    """Evaluate F at a single vector; exactly 0 at the origin."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != norm.dim:
        raise InputError(f"vector of shape {v.shape} does not match norm dimension {norm.dim}")
    if not np.any(v):
        return 0.0
    return float(norm.evaluate(v))
