"""
The dual norm D = F* on V* as a convex functional.

Closed-form duals (euclidean, weighted_lp) are norms of their own. Other
smooth norms get D through the Legendre transform of F^2/2: the gradient of
D^2/2 at w is the maximizer v of <w, v> - F(v)^2/2, and its Hessian is the
inverse of the Hessian of F^2/2 at v. Anything else is tabulated, which is
only possible in dimension 2.
"""
import logging

import numpy as np

from core.errors import InputError
from minkowski.duality import closed_form_dual, dual_norm_newton, dual_table_norm
from minkowski.norms import MinkowskiNorm

logger = logging.getLogger(__name__)

HESSIAN_RIDGE = 1e-14
TABLE_NODES = 4096


class DualFunctional:
    """
    D = F* with the same evaluation surface as a MinkowskiNorm
    (evaluate, grad_half_sq, hess_half_sq), so norm routines run on it.
    """

    def __init__(self, norm: MinkowskiNorm):
        self.norm = norm
        self.dim = norm.dim
        self.family = f"dual({norm.family})"
        closed = closed_form_dual(norm)
        if closed is not None:
            self.kind, self._dual = "closed_form", closed
        elif norm.is_smooth:
            self.kind, self._dual = "legendre", None
        elif norm.dim == 2:
            self.kind, self._dual = "table", dual_table_norm(norm, nodes=TABLE_NODES)
            logger.debug("tabulated dual of %s on %d nodes", norm.family, TABLE_NODES)
        else:
            raise InputError(f"no dual representation for a nonsmooth {norm.family} norm in dimension {norm.dim}")

    @property
    def as_norm(self) -> MinkowskiNorm | None:
        """D as a MinkowskiNorm, when it is one."""
        return self._dual

    @property
    def is_smooth(self) -> bool:
        if self.kind == "closed_form":
            return self._dual.is_smooth
        return self.kind == "legendre"

    @property
    def is_polyhedral(self) -> bool:
        return self.kind == "closed_form" and self._dual.is_polyhedral

    def evaluate(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if self._dual is not None:
            return self._dual.evaluate(w)
        if w.ndim == 1:
            return np.float64(self.value(w))
        flat = w.reshape(-1, self.dim)
        return np.array([self.value(row) for row in flat]).reshape(w.shape[:-1])

    def value(self, w) -> float:
        w = np.asarray(w, dtype=float)
        if not np.any(w):
            return 0.0
        if self._dual is not None:
            return float(self._dual.evaluate(w))
        return dual_norm_newton(self.norm, w).value

    def grad_half_sq(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if self._dual is not None:
            return self._dual.grad_half_sq(w)
        if not np.any(w):
            return np.zeros(self.dim)
        result = dual_norm_newton(self.norm, w)
        return result.value * result.maximizer

    def hess_half_sq(self, w) -> np.ndarray:
        if self._dual is not None:
            return self._dual.hess_half_sq(w)
        v = self.grad_half_sq(w)
        return np.linalg.inv(self.norm.hess_half_sq(v) + HESSIAN_RIDGE * np.eye(self.dim))

    def subgradient(self, w) -> np.ndarray:
        """A subgradient of D at w (a maximizer direction scaled to F = 1 for smooth D)."""
        w = np.asarray(w, dtype=float)
        value = self.value(w)
        if value == 0.0:
            return np.zeros(self.dim)
        return np.asarray(self.grad_half_sq(w), dtype=float) / value
