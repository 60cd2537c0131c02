"""McShane extension v -> min_j (f_j + L * N(v - x_j))."""
import logging

import numpy as np

from core.errors import InputError, PreconditionError
from minkowski.norms import MinkowskiNorm

logger = logging.getLogger(__name__)

PAIR_CHUNK = 256
EVAL_CHUNK = 256
LIPSCHITZ_SLACK = 1e-12


class McShaneExtension:
    """L-Lipschitz extension of point values with respect to a norm."""

    def __init__(self, points, values, lipschitz: float, norm: MinkowskiNorm):
        self.points = np.asarray(points, dtype=float).reshape(len(values), norm.dim)
        self.values = np.asarray(values, dtype=float)
        self.lipschitz = float(lipschitz)
        self.norm = norm

    def __call__(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        single = v.ndim == 1
        v = v.reshape(-1, self.norm.dim)
        out = np.empty(len(v))
        for start in range(0, len(v), EVAL_CHUNK):
            block = v[start:start + EVAL_CHUNK]
            cost = self.norm.evaluate(block[:, None, :] - self.points[None, :, :])
            out[start:start + len(block)] = np.min(self.values[None, :] + self.lipschitz * cost, axis=1)
        return out[0] if single else out


def check_lipschitz(points, values, lipschitz: float, norm: MinkowskiNorm):
    """Raise PreconditionError naming the first pair with f_i - f_j > L N(x_i - x_j)."""
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    scale = max(1.0, float(np.max(np.abs(values), initial=0.0)))
    for start in range(0, len(points), PAIR_CHUNK):
        block = points[start:start + PAIR_CHUNK]
        gap = values[start:start + PAIR_CHUNK, None] - values[None, :]
        bound = lipschitz * norm.evaluate(block[:, None, :] - points[None, :, :])
        excess = gap - bound
        if np.any(excess > LIPSCHITZ_SLACK * scale):
            i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
            i += start
            raise PreconditionError(
                f"values at samples {i} and {j} differ by {abs(values[i] - values[j]):.6g}, "
                f"more than L * distance = {lipschitz * float(norm.evaluate(points[i] - points[j])):.6g}",
                witness=(int(i), int(j)),
            )


def mcshane_extend(values, lipschitz: float, norm: MinkowskiNorm, validate: bool = True) -> McShaneExtension:
    """
    Extend (point, value) pairs to the whole chart.

    Args:
        values: Sequence of (point, value) pairs; points may be scalars in dimension 1
        lipschitz: Lipschitz constant L (>= 0)
        norm: Norm on chart vectors
        validate: Check that the values are L-Lipschitz first

    Returns:
        McShaneExtension, exact at the given points and L-Lipschitz
    """
    if not lipschitz >= 0:
        raise InputError(f"Lipschitz constant must be non-negative, got {lipschitz}")
    if len(values) == 0:
        raise InputError("McShane extension needs at least one value")
    points = np.array([np.atleast_1d(np.asarray(p, dtype=float)) for p, _ in values])
    vals = np.array([float(v) for _, v in values])
    if points.shape[1] != norm.dim:
        raise InputError(f"points of dimension {points.shape[1]} do not match norm dimension {norm.dim}")
    if validate:
        check_lipschitz(points, vals, lipschitz, norm)
    return McShaneExtension(points, vals, lipschitz, norm)
