"""
Infinitesimal Hilbertianity through the parallelogram identity.

    D(x) = W(f+g)^2 + W(f-g)^2 - 2 W(f)^2 - 2 W(g)^2

integrated against mu and compared with the integral of 2 W(f)^2 + 2 W(g)^2.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from core.errors import InputError
from metricgraph.fields import make_field
from metricgraph.sampling import DEFAULT_K, sample_manifold
from sobolev.wug import DEFAULT_DELTA, DEFAULT_EPS, DEFAULT_LAMBDA, LADDER_RUNGS, wug_ladder

logger = logging.getLogger(__name__)

TOL_HILBERTIAN = 0.02
TOL_NON_HILBERTIAN = 0.10
SIGN_AGREEMENT = 0.9
MIN_SUPPORT = 32
SUPPORT_MASS = 0.99
SANDWICH_SLACK = 1e-12

REFINEMENT_FACTOR = 4
# neighbour count growth per doubling of n
NEIGHBOUR_GROWTH = 1.5
NOISE_FLOOR = 1e-6

VERDICTS = ("hilbertian_within_tol", "non_hilbertian", "inconclusive")
CSV_HEADER = ["index", "weight", "W_f", "W_g", "W_sum", "W_diff", "defect"]


def effective_support(weights, mass: float = SUPPORT_MASS) -> int:
    """Fewest samples carrying the given fraction of the total mass."""
    w = np.sort(np.asarray(weights, dtype=float))[::-1]
    total = float(np.sum(w))
    if total <= 0:
        return 0
    return int(np.searchsorted(np.cumsum(w), mass * total * (1.0 - 1e-12)) + 1)


def classify(relative: float, sign_agreement: float, support: int, tol_h: float = TOL_HILBERTIAN,
             tol_nh: float = TOL_NON_HILBERTIAN) -> str:
    if support < MIN_SUPPORT:
        return "inconclusive"
    if relative <= tol_h:
        return "hilbertian_within_tol"
    if relative >= tol_nh and sign_agreement >= SIGN_AGREEMENT:
        return "non_hilbertian"
    return "inconclusive"


@dataclass
class HilbertianityReport:
    weights: np.ndarray = field(repr=False)
    w_f: np.ndarray = field(repr=False)
    w_g: np.ndarray = field(repr=False)
    w_sum: np.ndarray = field(repr=False)
    w_diff: np.ndarray = field(repr=False)
    defect: np.ndarray = field(repr=False)
    integrated_abs: float
    integrated_signed: float
    relative: float
    sign_agreement: float
    support: int
    verdict: str
    thresholds: dict
    sandwich: dict
    ladders: list = field(default_factory=list, repr=False)

    def csv_rows(self) -> list:
        return [[i, self.weights[i], self.w_f[i], self.w_g[i], self.w_sum[i], self.w_diff[i], self.defect[i]]
                for i in range(len(self.defect))]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "integrated_abs": self.integrated_abs,
            "integrated_signed": self.integrated_signed,
            "relative": self.relative,
            "sign_agreement": self.sign_agreement,
            "effective_support": self.support,
            "thresholds": self.thresholds,
            "sandwich": self.sandwich,
            "ladders": [ladder.to_dict() for ladder in self.ladders],
        }


def sandwich_audit(w_f, w_g, w_sum, w_diff, eps_chart: float) -> dict:
    """(2W_f^2 + 2W_g^2) / (1+e)^4 <= W_sum^2 + W_diff^2 <= (1+e)^4 (2W_f^2 + 2W_g^2) per sample."""
    base = 2.0 * w_f ** 2 + 2.0 * w_g ** 2
    total = w_sum ** 2 + w_diff ** 2
    factor = (1.0 + eps_chart) ** 4
    slack = SANDWICH_SLACK * np.maximum(1.0, base)
    ok = (base / factor <= total + slack) & (total <= factor * base + slack)
    failures = np.flatnonzero(~ok)
    return {
        "applicable": True,
        "eps_chart": float(eps_chart),
        "factor": float(factor),
        "fraction_ok": float(np.mean(ok)) if len(ok) else 1.0,
        "failures": failures[:10].tolist(),
        "ok": len(failures) == 0,
    }


def hilbertianity_check(sampled, measure, f, g, params: dict | None = None) -> HilbertianityReport:
    """
    Parallelogram defect of the surrogate W over a weighted sample cloud.

    Args:
        sampled: SampledManifold
        measure: WeightedMeasure over the samples (the sample measure when None)
        f, g: ScalarFields with closed forms
        params: Optional overrides: delta, eps, lambda, rungs, seed, tol_h, tol_nh

    Returns:
        HilbertianityReport
    """
    params = dict(params or {})
    measure = measure if measure is not None else sampled.measure
    if len(measure.weights) != sampled.n:
        raise InputError(f"measure has {len(measure.weights)} weights for {sampled.n} samples")
    tol_h = float(params.get("tol_h", TOL_HILBERTIAN))
    tol_nh = float(params.get("tol_nh", TOL_NON_HILBERTIAN))
    options = {
        "delta": float(params.get("delta", DEFAULT_DELTA)),
        "eps": float(params.get("eps", DEFAULT_EPS)),
        "lam": float(params.get("lambda", DEFAULT_LAMBDA)),
        "rungs": int(params.get("rungs", LADDER_RUNGS)),
        "seed": int(params.get("seed", 0)),
    }
    ladders = [wug_ladder(h, sampled, measure, **options) for h in (f, g, f + g, f - g)]
    w_f, w_g, w_sum, w_diff = (ladder.estimate for ladder in ladders)
    defect = w_sum ** 2 + w_diff ** 2 - 2.0 * w_f ** 2 - 2.0 * w_g ** 2

    weights = measure.weights
    integrated_abs = measure.integrate(np.abs(defect))
    integrated_signed = measure.integrate(defect)
    scale = measure.integrate(2.0 * w_f ** 2 + 2.0 * w_g ** 2)
    relative = integrated_abs / scale if scale > 0 else 0.0
    dominant = np.sign(integrated_signed)
    charged = weights > 0
    agreeing = charged & (np.sign(defect) == dominant) if dominant != 0 else np.zeros_like(charged)
    sign_agreement = float(np.sum(weights[agreeing]) / np.sum(weights[charged]))
    support = effective_support(weights)
    verdict = classify(relative, sign_agreement, support, tol_h, tol_nh)

    if sampled.manifold.is_riemannian:
        eps_chart = max(ladder.cover_radius for ladder in ladders)
        sandwich = sandwich_audit(w_f, w_g, w_sum, w_diff, eps_chart)
    else:
        sandwich = {"applicable": False}
    logger.info("hilbertianity of (%s, %s): relative defect %.4g, verdict %s", f.tag, g.tag, relative, verdict)
    return HilbertianityReport(
        weights, w_f, w_g, w_sum, w_diff, defect, integrated_abs, integrated_signed, relative, sign_agreement,
        support, verdict,
        {"tol_h": tol_h, "tol_nh": tol_nh, "sign_agreement": SIGN_AGREEMENT, "min_support": MIN_SUPPORT,
         "support_mass": SUPPORT_MASS},
        sandwich, ladders,
    )


def refinement_study(manifold, f_spec: dict, g_spec: dict, n: int, levels: int = 2, k: int = DEFAULT_K,
                     measure_spec: dict | None = None, params: dict | None = None, seed: int = 0) -> dict:
    """
    Relative defect at n, 4n, ... samples.

    The neighbour count grows by NEIGHBOUR_GROWTH per doubling of n. The
    study counts as decreasing when every level is at most the previous one
    or below NOISE_FLOOR.
    """
    if levels < 2:
        raise InputError(f"a refinement study needs at least two levels, got {levels}")
    rows = []
    for level in range(levels):
        n_level = n * REFINEMENT_FACTOR ** level
        k_level = int(round(k * NEIGHBOUR_GROWTH ** (2 * level)))
        sampled = sample_manifold(manifold, n_level, measure_spec, seed=seed, k=k_level)
        f = make_field(sampled, f_spec)
        g = make_field(sampled, g_spec)
        report = hilbertianity_check(sampled, None, f, g, params)
        rows.append({"level": level, "n": sampled.n, "k": sampled.k, "relative": report.relative,
                     "integrated_abs": report.integrated_abs, "verdict": report.verdict})
        logger.info("refinement level %d: n=%d, k=%d, relative defect %.4g", level, sampled.n, sampled.k,
                    report.relative)
    decreasing = all(b["relative"] <= a["relative"] or b["relative"] <= NOISE_FLOOR
                     for a, b in zip(rows, rows[1:]))
    return {"rows": rows, "decreasing": decreasing, "noise_floor": NOISE_FLOOR}
