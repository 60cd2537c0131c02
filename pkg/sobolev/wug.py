"""
Weak-upper-gradient surrogates from smoothing ladders.

f is first divided by L = Lip(f) on the graph; the normalized field is
smoothed at (eps_j, lam_j) = (eps / 2^j, lam / 2^j) and W(f)(x) is
L * min_j |d g_j|(x). Scaling f by a power of two therefore scales W by the
same factor exactly.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from core.errors import InputError
from metricgraph.fields import ScalarField
from metricgraph.lipschitz import lip_global
from smoothing.approximate import build_smoothing
from sobolev.differential import differential_components
from sobolev.fields import dual_norms, sample_norms

logger = logging.getLogger(__name__)

LADDER_RUNGS = 3
DEFAULT_DELTA = 0.2
DEFAULT_EPS = 0.05
DEFAULT_LAMBDA = 0.1


@dataclass
class WugRung:
    index: int
    eps: float
    lam: float
    r: float
    charts: int
    l2_distance: float
    l2_differential: float
    norms: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {"rung": self.index, "eps": self.eps, "lambda": self.lam, "r": self.r, "charts": self.charts,
                "l2_distance": self.l2_distance, "l2_differential": self.l2_differential}


@dataclass
class WugLadder:
    tag: str
    lipschitz: float
    delta: float
    rungs: list
    estimate: np.ndarray = field(repr=False, default=None)

    @property
    def cover_radius(self) -> float:
        return max((rung.r for rung in self.rungs), default=0.0)

    def to_dict(self) -> dict:
        return {"function": self.tag, "lipschitz": self.lipschitz, "delta": self.delta,
                "rungs": [rung.to_dict() for rung in self.rungs]}


def normalized_field(f: ScalarField, lipschitz: float) -> ScalarField:
    closed = f.closed_form
    return ScalarField(f.values / lipschitz, (lambda x: closed(x) / lipschitz) if closed is not None else None,
                       f"{f.tag}/Lip")


def wug_ladder(f: ScalarField, sampled, measure=None, delta: float = DEFAULT_DELTA, eps: float = DEFAULT_EPS,
               lam: float = DEFAULT_LAMBDA, rungs: int = LADDER_RUNGS, seed: int = 0) -> WugLadder:
    """
    Smoothing ladder of f with per-rung L2(mu) distances and differential norms.

    Args:
        f: ScalarField with a closed form (or identically zero)
        sampled: SampledManifold
        measure: WeightedMeasure for the L2 norms (the sample measure by default)
        delta: Support enlargement, fixed along the ladder
        eps: Sup-norm tolerance of the first rung, relative to Lip(f)
        lam: Lipschitz slack of the first rung, relative to Lip(f)
        rungs: Number of rungs
        seed: Seed of the first rung; rung j uses seed + j

    Returns:
        WugLadder whose estimate is the per-sample minimum over the rungs
    """
    if rungs < 1:
        raise InputError(f"a ladder needs at least one rung, got {rungs}")
    measure = measure if measure is not None else sampled.measure
    lipschitz = lip_global(f, sampled)
    if f.is_zero() or lipschitz == 0.0:
        return WugLadder(f.tag, lipschitz, delta, [], np.zeros(sampled.n))
    if not f.has_closed_form:
        raise InputError(f"field '{f.tag}' needs a closed form for chart differentials")
    unit = normalized_field(f, lipschitz)
    norms = sample_norms(sampled)
    ladder = []
    for j in range(rungs):
        eps_j, lam_j = eps / 2.0 ** j, lam / 2.0 ** j
        smoothed, plan = build_smoothing(sampled, unit, delta, eps_j, lam_j, seed=seed + j)
        g = ScalarField(smoothed.at_samples(), smoothed, f"smooth({unit.tag})")
        w = lipschitz * dual_norms(sampled, differential_components(g, sampled), norms)
        ladder.append(WugRung(j, eps_j, lam_j, plan.r, len(plan.charts),
                              measure.l2_norm(lipschitz * g.values - f.values), measure.l2_norm(w), w))
        logger.info("rung %d of '%s': %d charts, |g - f| = %.3g, |dg| = %.4g", j, f.tag, len(plan.charts),
                    ladder[-1].l2_distance, ladder[-1].l2_differential)
    estimate = np.minimum.reduce([rung.norms for rung in ladder])
    return WugLadder(f.tag, lipschitz, delta, ladder, estimate)


def wug_estimate(f: ScalarField, sampled, measure=None, delta: float = DEFAULT_DELTA, eps: float = DEFAULT_EPS,
                 lam: float = DEFAULT_LAMBDA, rungs: int = LADDER_RUNGS, seed: int = 0) -> np.ndarray:
    """Per-sample surrogate W(f) >= |Df|, the minimum of |d g_j| over the ladder."""
    return wug_ladder(f, sampled, measure, delta, eps, lam, rungs, seed).estimate
