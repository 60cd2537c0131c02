"""
Pointwise differentials by central differences in the normal chart.

The covector of g at x has components

    (g(exp_x(s I e_k)) - g(exp_x(-s I e_k))) / (2 s)

with s half the finest mollifier grid step active at x, or DEFAULT_STEP
for plain closed forms. When a stencil point leaves the charted region the
step is halved and the stencil retried.
"""
import math
import logging

import numpy as np

from core.errors import InputError, StencilError
from sobolev.fields import CovectorField, covector_field

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-4
STENCIL_RETRIES = 3


def _representation(g):
    rep = getattr(g, "closed_form", g)
    if rep is None or not callable(rep):
        raise InputError(f"field '{getattr(g, 'tag', g)}' has no chart-differentiable representation")
    return rep


def _evaluate(rep, points: np.ndarray):
    if hasattr(rep, "evaluate"):
        return rep.evaluate(points)
    values = np.asarray(rep(points), dtype=float)
    return values, np.isfinite(values)


def stencil_steps(g, sampled, indices) -> np.ndarray:
    rep = _representation(g)
    if hasattr(rep, "grid_steps"):
        steps = 0.5 * rep.grid_steps()[indices]
        return np.where(np.isfinite(steps), steps, DEFAULT_STEP)
    return np.full(len(indices), DEFAULT_STEP)


def _stencils(sampled, indices: np.ndarray, steps: np.ndarray) -> np.ndarray:
    """Stencil points, shape (len(indices), 2 * dim, ambient): +e_0, -e_0, +e_1, ..."""
    manifold = sampled.manifold
    dim = manifold.intrinsic_dim
    signs = np.array([1.0, -1.0])
    velocities = np.empty((len(indices), 2 * dim, manifold.ambient_dim))
    for row, (x, s) in enumerate(zip(indices, steps)):
        frame = manifold.frame(sampled.points[x])
        velocities[row] = (s * signs[None, :, None] * frame.T[:, None, :]).reshape(2 * dim, -1)
    base = np.repeat(sampled.points[indices][:, None, :], 2 * dim, axis=1)
    ends = manifold.exp(base.reshape(-1, manifold.ambient_dim), velocities.reshape(-1, manifold.ambient_dim))
    return ends.reshape(velocities.shape)


def differential_components(g, sampled, indices=None, steps=None) -> np.ndarray:
    """
    Chart covectors of g at samples, shape (len(indices), dim).

    Raises:
        StencilError: a stencil stays outside the charted region after
            STENCIL_RETRIES halvings of the step
    """
    rep = _representation(g)
    indices = np.arange(sampled.n) if indices is None else np.atleast_1d(np.asarray(indices, dtype=int))
    steps = stencil_steps(g, sampled, indices) if steps is None else np.broadcast_to(steps, indices.shape).copy()
    dim = sampled.manifold.intrinsic_dim
    out = np.full((len(indices), dim), math.nan)
    pending = np.arange(len(indices))
    for attempt in range(STENCIL_RETRIES + 1):
        points = _stencils(sampled, indices[pending], steps[pending])
        values, covered = _evaluate(rep, points.reshape(-1, sampled.manifold.ambient_dim))
        values = values.reshape(len(pending), dim, 2)
        ok = covered.reshape(len(pending), -1).all(axis=1)
        done = pending[ok]
        out[done] = (values[ok, :, 0] - values[ok, :, 1]) / (2.0 * steps[done, None])
        pending = pending[~ok]
        if len(pending) == 0:
            return out
        logger.debug("retrying %d stencils with a halved step", len(pending))
        steps[pending] *= 0.5
    raise StencilError("stencil leaves the charted region",
                       diagnostics={"sample": int(indices[pending[0]]), "step": float(steps[pending[0]]),
                                    "failures": int(len(pending))})


def pointwise_differential(g, sampled, x: int, step: float | None = None) -> np.ndarray:
    """
    Differential of g at sample x in its normal chart.

    Args:
        g: ScalarField with a closed form (a smoothed function or an analytic field),
            or a callable on manifold points
        sampled: SampledManifold
        x: Sample index
        step: Finite-difference step; half the mollifier grid step by default

    Returns:
        Covector of length intrinsic_dim
    """
    if not 0 <= int(x) < sampled.n:
        raise InputError(f"sample index {x} out of range")
    return differential_components(g, sampled, [int(x)], None if step is None else float(step))[0]


def differential_field(g, sampled) -> CovectorField:
    """d g at every sample with its pointwise dual norms |d g|."""
    return covector_field(sampled, differential_components(g, sampled))
