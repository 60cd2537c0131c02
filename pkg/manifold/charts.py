"""
Normal charts and the biLipschitz radius search.

A chart at c is phi(y) = I^+ log_c(y) with inverse u -> exp_c(I u), where I is
the frame at c. Its norm is u -> F(c, I u). The search scans the lattice
R * 2^-j (j = 0..20, R the kind's injectivity hint) from the top and keeps the
first radius whose sampled distortion stays within 1 + eps.
"""
import math
import logging
from dataclasses import dataclass

import numpy as np

from core.errors import InputError, NumericError, SearchFailureError
from manifold.specs import Manifold
from minkowski.norms import MinkowskiNorm
from minkowski.validation import equivalence_constant

logger = logging.getLogger(__name__)

LATTICE_DEPTH = 20
DEFAULT_BUDGET = 256
# relative offset of the near-diagonal pairs placed on the boundary sphere
INFINITESIMAL_OFFSET = 1e-3


@dataclass(frozen=True, eq=False)
class ChartData:
    manifold: Manifold
    center: np.ndarray
    radius: float
    bilip_constant: float
    chart_norm: MinkowskiNorm
    equiv_constant: float
    frame: np.ndarray
    measured_distortion: float = math.nan

    def forward(self, y) -> np.ndarray:
        """phi(y): chart coordinates of manifold points."""
        return self.manifold.log(self.center, y) @ np.linalg.pinv(self.frame).T

    def inverse(self, u) -> np.ndarray:
        """phi^-1(u): manifold points of chart vectors."""
        return self.manifold.exp(self.center, np.asarray(u, dtype=float) @ self.frame.T)

    def contains(self, y) -> np.ndarray:
        return self.manifold.distance(self.center, y) < self.radius

    def to_dict(self) -> dict:
        return {
            "center": self.center.tolist(),
            "radius": self.radius,
            "bilip_constant": self.bilip_constant,
            "chart_norm": self.chart_norm.to_dict(),
            "equiv_constant": self.equiv_constant,
            "measured_distortion": self.measured_distortion,
        }


def build_chart(manifold: Manifold, center, radius: float, bilip_constant: float,
                measured_distortion: float = math.nan) -> ChartData:
    center = np.asarray(center, dtype=float)
    chart_norm = manifold.frame_norm(center)
    return ChartData(
        manifold=manifold,
        center=center,
        radius=float(radius),
        bilip_constant=float(bilip_constant),
        chart_norm=chart_norm,
        equiv_constant=equivalence_constant(chart_norm),
        frame=manifold.frame(center),
        measured_distortion=float(measured_distortion),
    )


def _unit_ball_pairs(norm: MinkowskiNorm, budget: int, rng: np.random.Generator):
    """
    Pairs (u, w) in the closed unit ball of norm, to be scaled by the radius.

    The first half sits on the boundary sphere at near-diagonal separation,
    where curvature distortion peaks; the rest are uniform in the ball.
    """
    n = norm.dim

    def directions(count):
        g = rng.standard_normal((count, n))
        return g / norm.evaluate(g)[:, None]

    half = max(budget // 2, 1)
    u_edge = directions(half)
    w_edge = u_edge + INFINITESIMAL_OFFSET * directions(half)
    rest = max(budget - half, 1)
    u_rand = directions(rest) * rng.uniform(size=(rest, 1)) ** (1.0 / n)
    w_rand = directions(rest) * rng.uniform(size=(rest, 1)) ** (1.0 / n)
    return np.vstack([u_edge, u_rand]), np.vstack([w_edge, w_rand])


def _distortion(manifold: Manifold, center, frame, norm, u, w, r) -> float:
    chart = norm.evaluate(r * (w - u))
    keep = chart > 0
    try:
        pu = manifold.exp(center, (r * u[keep]) @ frame.T)
        pw = manifold.exp(center, (r * w[keep]) @ frame.T)
        ratio = manifold.distance(pu, pw) / chart[keep]
    except NumericError as e:
        logger.debug("distortion at radius %.6g unavailable: %s", r, e)
        return math.inf
    if not np.all(np.isfinite(ratio)) or np.min(ratio) <= 0:
        return math.inf
    return float(max(np.max(ratio), 1.0 / np.min(ratio)))


def bilipschitz_radius(manifold: Manifold, x, eps: float, budget: int = DEFAULT_BUDGET, seed: int = 0):
    """
    Largest lattice radius at which exp_x is (1+eps)-biLipschitz in the chart norm.

    Args:
        manifold: Manifold kind
        x: Chart center
        eps: Distortion tolerance (> 0)
        budget: Sample pairs per candidate radius
        seed: Seed for the pair sampler; pairs are shared across radii

    Returns:
        Tuple (r, measured_distortion)
    """
    if not eps > 0:
        raise InputError(f"biLipschitz tolerance must be positive, got {eps}")
    if budget < 2:
        raise InputError(f"biLipschitz budget must be at least 2, got {budget}")
    x = np.asarray(x, dtype=float)
    frame = manifold.frame(x)
    norm = manifold.frame_norm(x)
    u, w = _unit_ball_pairs(norm, budget, np.random.default_rng(seed))
    hint = manifold.injectivity_hint
    worst = math.inf
    for j in range(LATTICE_DEPTH + 1):
        r = hint * 2.0 ** -j
        distortion = _distortion(manifold, x, frame, norm, u, w, r)
        logger.debug("radius %.6g at %s: distortion %.9g", r, x.tolist(), distortion)
        if distortion <= 1.0 + eps:
            return r, distortion
        worst = distortion
    raise SearchFailureError(
        f"no lattice radius down to {hint * 2.0 ** -LATTICE_DEPTH:.3g} is (1+{eps})-biLipschitz "
        f"at {x.tolist()} (last distortion {worst:.6g})"
    )


def chart_distortion(manifold: Manifold, chart: ChartData, budget: int = DEFAULT_BUDGET, seed: int = 1) -> float:
    """Distortion of the chart on pairs drawn independently of its search."""
    u, w = _unit_ball_pairs(chart.chart_norm, budget, np.random.default_rng(seed))
    return _distortion(manifold, chart.center, chart.frame, chart.chart_norm, u, w, chart.radius)


def certified_chart(manifold: Manifold, center, eps: float, budget: int = DEFAULT_BUDGET, seed: int = 0,
                    max_radius: float | None = None) -> ChartData:
    """Search a radius and build the chart; max_radius caps the radius without re-certifying."""
    r, distortion = bilipschitz_radius(manifold, center, eps, budget=budget, seed=seed)
    if max_radius is not None and max_radius < r:
        r = max_radius
    return build_chart(manifold, center, r, 1.0 + eps, distortion)
