"""
C^1 approximation of Lipschitz functions on sampled manifolds.

    cover -> partition of unity -> chart functions (McShane extensions)
          -> scale selection -> mollification -> g = sum_i psi_i (g_i o phi_i)

followed by an audit of |g - f|, the local Lipschitz bound and the support
of g at every sample.
"""
import math
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra

from core.errors import DegenerateBallError, InputError, StencilError
from metricgraph.distances import local_distances
from metricgraph.extension import mcshane_extend
from metricgraph.fields import ScalarField
from metricgraph.lipschitz import lip_global
from minkowski.duality import unit_directions
from smoothing.cover import CoverData, build_cover
from smoothing.mollify import MollifiedFunction, mollify
from smoothing.partition import PartitionOfUnity, build_partition

logger = logging.getLogger(__name__)

PROBES_PER_CHART = 32
GRADIENT_STEP = 1e-4
SLOPE_DIRECTIONS = 360
ESTIMATE_CHARTS = 64
ESTIMATE_PROBES = 16
ESTIMATE_SLACK = 0.05
AUDIT_EDGE_FACTOR = 4.0
LAMBDA_SLACK = 1.1
LIP_PASS_FRACTION = 0.99
SCALE_TOL = 1e-12

CSV_HEADER = ["index", "err_abs", "lipa_g", "lipf_ball", "bound_ok", "support_ok"]


def _ball_points(norm, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((count, norm.dim))
    dirs = g / norm.evaluate(g)[:, None]
    return dirs * (radius * rng.uniform(size=(count, 1)) ** (1.0 / norm.dim))


def _pair_slope(norm, coords: np.ndarray, values: np.ndarray) -> float:
    """max (f_i - f_j) / N(u_i - u_j) over distinct anchors."""
    if len(coords) < 2:
        return 0.0
    dist = norm.evaluate(coords[:, None, :] - coords[None, :, :])
    gap = values[:, None] - values[None, :]
    off = dist > 0
    return float(max(0.0, np.max(gap[off] / dist[off])))


def _gradient_slope(closed, chart, anchors: np.ndarray) -> float:
    """Largest directional derivative of f o phi^-1 at the anchors, per unit chart norm."""
    dim = anchors.shape[1]
    step = GRADIENT_STEP * chart.radius
    shifts = np.eye(dim) * step
    plus = closed(chart.inverse((anchors[:, None, :] + shifts[None]).reshape(-1, dim))).reshape(-1, dim)
    minus = closed(chart.inverse((anchors[:, None, :] - shifts[None]).reshape(-1, dim))).reshape(-1, dim)
    grad = (plus - minus) / (2.0 * step)
    dirs = unit_directions(dim, SLOPE_DIRECTIONS)
    dirs = dirs / chart.chart_norm.evaluate(dirs)[:, None]
    return float(max(0.0, np.max(grad @ dirs.T)))


class ChartFunction:
    """
    f_i on chart vectors.

    With a closed form, f o phi^-1 inside the chart ball and the McShane
    extension of the anchors outside; otherwise the McShane extension of the
    chart samples everywhere.
    """

    def __init__(self, chart, anchors, values, lipschitz: float, closed_form=None, member_coords=None):
        self.chart = chart
        self.dim = chart.chart_norm.dim
        self.anchors = anchors
        self.values = values
        self.lipschitz = float(lipschitz)
        self.closed_form = closed_form
        self.member_coords = member_coords
        self.is_zero = not np.any(values)
        self.extension = None
        if not self.is_zero:
            self.extension = mcshane_extend(list(zip(anchors, values)), self.lipschitz, chart.chart_norm)

    def __call__(self, u) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        out = np.zeros(len(u))
        if self.is_zero:
            return out
        inside = np.zeros(len(u), dtype=bool)
        if self.closed_form is not None:
            inside = self.chart.chart_norm.evaluate(u) < self.chart.radius
            if np.any(inside):
                out[inside] = self.closed_form(self.chart.inverse(u[inside]))
        if not np.all(inside):
            out[~inside] = self.extension(u[~inside])
        return out


def chart_function(sampled, f: ScalarField, chart, members: np.ndarray, r: float,
                   rng: np.random.Generator):
    """
    Chart function of f on one chart.

    Returns:
        Tuple (ChartFunction, Lip(f; B_i)) where Lip(f; B_i) uses graph distances
    """
    norm = chart.chart_norm
    lip_ball = lip_global(f, sampled, members) if len(members) >= 2 else 0.0
    coords = np.atleast_2d(chart.forward(sampled.points[members])).reshape(len(members), norm.dim)
    values = f.values[members]
    anchors, anchor_values, slope = coords, values, 0.0
    if f.closed_form is not None:
        probes = _ball_points(norm, chart.radius, PROBES_PER_CHART, rng)
        anchors = np.vstack([coords, probes])
        anchor_values = np.concatenate([values, f.closed_form(chart.inverse(probes))])
        if np.any(anchor_values):
            slope = _gradient_slope(f.closed_form, chart, anchors)
    lipschitz = max((1.0 + r) * lip_ball, _pair_slope(norm, anchors, anchor_values), slope)
    return ChartFunction(chart, anchors, anchor_values, lipschitz, f.closed_form, coords), lip_ball


def choose_scale(lipschitz: float, equiv: float, lip_psi: float, m: int, r: float, eps: float,
                 radius: float) -> int:
    """
    Smallest integer k with L C / k <= eps, Lip(psi) L C / k <= r / m and
    kernel radius 1/k <= radius / 4.
    """
    if not radius > 0:
        raise InputError(f"chart radius must be positive, got {radius}")
    k = max(1, math.ceil(4.0 / radius))
    a = lipschitz * equiv
    if a > 0:
        k = max(k, math.ceil(a / eps), math.ceil(lip_psi * a * m / r))
        while a / k > eps or lip_psi * a / k > r / m:
            k += 1
    return int(k)


@dataclass
class ChartPlan:
    index: int
    radius: float
    lip_f_ball: float
    lipschitz: float
    equiv_constant: float
    lip_psi: float
    m: int
    k: int
    grid_step: float
    zero: bool
    est_a_error: float = math.nan
    est_a_bound: float = math.nan
    est_b_ratio: float = math.nan

    @property
    def est_a_ok(self) -> bool:
        if math.isnan(self.est_a_error):
            return True
        return self.est_a_error <= self.est_a_bound * (1.0 + ESTIMATE_SLACK) + 1e-12

    @property
    def est_b_ok(self) -> bool:
        return math.isnan(self.est_b_ratio) or self.est_b_ratio <= 1.0 + ESTIMATE_SLACK


@dataclass
class SmoothingPlan:
    charts: list
    r: float
    delta: float
    eps: float
    lam: float
    kernel: str = "exp_bump"

    def check(self) -> list:
        """Charts violating either scale inequality, as messages."""
        problems = []
        for p in self.charts:
            a = p.lipschitz * p.equiv_constant
            if a / p.k > self.eps * (1.0 + SCALE_TOL):
                problems.append(f"chart {p.index}: L C / k = {a / p.k:.6g} exceeds eps = {self.eps:.6g}")
            if p.lip_psi * a / p.k > self.r / p.m * (1.0 + SCALE_TOL):
                problems.append(f"chart {p.index}: Lip(psi) L C / k = {p.lip_psi * a / p.k:.6g} "
                                f"exceeds r / m = {self.r / p.m:.6g}")
        return problems

    def estimate_failures(self) -> list:
        return [p.index for p in self.charts if not (p.est_a_ok and p.est_b_ok)]

    def to_dict(self) -> dict:
        ks = [p.k for p in self.charts]
        return {
            "charts": len(self.charts),
            "r": self.r,
            "delta": self.delta,
            "eps": self.eps,
            "lambda": self.lam,
            "kernel": self.kernel,
            "k": {"min": min(ks), "max": max(ks)} if ks else {},
            "zero_charts": sum(p.zero for p in self.charts),
            "violations": self.check(),
            "estimate_failures": self.estimate_failures(),
        }


class SmoothedFunction:
    """g = sum_i psi_i (g_i o phi_i), evaluable at manifold points."""

    def __init__(self, partition: PartitionOfUnity, chart_functions: list, mollified: list):
        self.partition = partition
        self.chart_functions = chart_functions
        self.mollified = mollified

    @property
    def cover(self) -> CoverData:
        return self.partition.cover

    def evaluate(self, points):
        """
        g at arbitrary points.

        Returns:
            Tuple (values, covered mask); values outside every chart are nan
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        psi, covered = self.partition.evaluate(points)
        out = np.zeros(len(points))
        for c in range(psi.shape[1]):
            start, end = psi.indptr[c], psi.indptr[c + 1]
            if start == end or self.mollified[c] is None:
                continue
            rows = psi.indices[start:end]
            u = self.cover.charts[c].forward(points[rows]).reshape(len(rows), -1)
            out[rows] += psi.data[start:end] * self.mollified[c](u)
        out[~covered] = math.nan
        return out, covered

    def __call__(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values, covered = self.evaluate(points)
        if not np.all(covered):
            raise StencilError("point outside the charted region",
                               diagnostics={"uncovered": int(np.sum(~covered)),
                                            "first": np.asarray(points[~covered][0]).tolist()})
        return values

    def grid_steps(self) -> np.ndarray:
        """Finest grid step among the charts active at each sample."""
        psi = self.partition.at_samples
        steps = np.array([m.grid_step if m is not None else math.inf for m in self.mollified])
        out = np.full(psi.shape[0], math.inf)
        for x in range(psi.shape[0]):
            active = psi.indices[psi.indptr[x]:psi.indptr[x + 1]]
            if len(active):
                out[x] = float(np.min(steps[active]))
        return out

    def at_samples(self) -> np.ndarray:
        """g at the samples, from the stored chart coordinates of the chart members."""
        psi = self.partition.at_samples.tocsc()
        out = np.zeros(psi.shape[0])
        for c in range(psi.shape[1]):
            start, end = psi.indptr[c], psi.indptr[c + 1]
            if start == end or self.mollified[c] is None:
                continue
            rows = psi.indices[start:end]
            members = self.cover.members[c]
            coords = self.chart_functions[c].member_coords[np.searchsorted(members, rows)]
            out[rows] += psi.data[start:end] * self.mollified[c](coords)
        return out


def _plan_estimates(plan: ChartPlan, func: ChartFunction, smooth: MollifiedFunction, rng: np.random.Generator):
    norm = func.chart.chart_norm
    margin = 2.0 * plan.equiv_constant / plan.k
    radius = max(plan.radius - margin, 0.5 * plan.radius)
    probes = _ball_points(norm, radius, ESTIMATE_PROBES, rng)
    g = smooth(probes)
    plan.est_a_error = float(np.max(np.abs(g - func(probes))))
    plan.est_a_bound = plan.lipschitz * plan.equiv_constant / plan.k
    if plan.lipschitz > 0:
        dist = norm.evaluate(probes[:, None, :] - probes[None, :, :])
        off = dist > 0
        ratio = np.abs(g[:, None] - g[None, :])[off] / (plan.lipschitz * dist[off])
        plan.est_b_ratio = float(np.max(ratio))


def build_smoothing(sampled, f: ScalarField, delta: float, eps: float, lam: float, seed: int = 0):
    """
    Cover, partition, chart functions, scales and mollifiers for f.

    Returns:
        Tuple (SmoothedFunction, SmoothingPlan)
    """
    if not eps > 0:
        raise InputError(f"eps must be positive, got {eps}")
    cover = build_cover(sampled, f, delta, lam, seed=seed)
    partition = build_partition(cover, sampled)
    rng = np.random.default_rng(seed)
    plans, functions, mollified = [], [], []
    for c, chart in enumerate(cover.charts):
        func, lip_ball = chart_function(sampled, f, chart, cover.members[c], cover.r, rng)
        k = choose_scale(func.lipschitz, chart.equiv_constant, partition.lip[c], int(cover.m_i[c]), cover.r, eps,
                         chart.radius)
        grid_step = 1.0 / (4.0 * k)
        plans.append(ChartPlan(c, chart.radius, lip_ball, func.lipschitz, chart.equiv_constant,
                               float(partition.lip[c]), int(cover.m_i[c]), k, grid_step, func.is_zero))
        functions.append(func)
        mollified.append(None if func.is_zero else mollify(func, k, grid_step, func.dim))
    active = [c for c, p in enumerate(plans) if not p.zero]
    for c in rng.permutation(active)[:ESTIMATE_CHARTS]:
        _plan_estimates(plans[c], functions[c], mollified[c], rng)
    plan = SmoothingPlan(plans, cover.r, delta, eps, lam)
    for problem in plan.check():
        logger.warning("smoothing plan: %s", problem)
    return SmoothedFunction(partition, functions, mollified), plan


def _ball_edge_lipschitz(values: np.ndarray, sampled, radius: float) -> np.ndarray:
    """Largest edge slope of values among edges inside each graph ball B_radius(x)."""
    rows, cols, lengths = sampled.edges()
    slopes = np.abs(values[rows] - values[cols]) / lengths
    local = local_distances(sampled, radius)
    out = np.zeros(sampled.n)
    inside = np.zeros(sampled.n, dtype=bool)
    for x in range(sampled.n):
        start, end = local.indptr[x], local.indptr[x + 1]
        idx = local.indices[start:end][local.data[start:end] <= radius]
        inside[:] = False
        inside[idx] = True
        inside[x] = True
        both = inside[rows] & inside[cols]
        out[x] = float(np.max(slopes[both], initial=0.0))
    return out


def _ball_lipschitz(values: np.ndarray, sampled, radius: float) -> np.ndarray:
    """Lip(values; B_radius(x)) with graph distances; nan where the ball holds one sample."""
    local = local_distances(sampled, 2.0 * radius)
    out = np.full(sampled.n, math.nan)
    for x in range(sampled.n):
        start, end = local.indptr[x], local.indptr[x + 1]
        members = local.indices[start:end][local.data[start:end] <= radius]
        members = np.union1d(members, [x])
        if len(members) < 2:
            continue
        dist = local[members][:, members].toarray()
        off = dist > 0
        gap = np.abs(values[members][:, None] - values[members][None, :])
        out[x] = float(np.max(gap[off] / dist[off], initial=0.0))
    return out


@dataclass
class SmoothingReport:
    params: dict
    rows: list
    summary: dict
    plan: SmoothingPlan = None
    unresolved: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.summary.get("passed"))

    def csv_rows(self) -> list:
        return [[row[key] for key in CSV_HEADER] for row in self.rows]

    def to_dict(self) -> dict:
        return {"params": self.params, "summary": self.summary,
                "plan": self.plan.to_dict() if self.plan is not None else None}


def audit_smoothing(sampled, f: ScalarField, g_values: np.ndarray, delta: float, eps: float, lam: float,
                    r_audit: float | None = None):
    """
    Per-sample audit of |g - f| <= eps, lip_a(g) <= Lip(f; B_delta) + 1.1 lam
    and g = 0 away from the delta-neighbourhood of spt f.

    Lip(f; B_delta(x)) is the largest edge slope of f inside the graph ball,
    a lower bound for the pairwise constant.

    A sample whose audit ball holds no other sample is unresolved; its
    Lipschitz bound is unchecked and reported as failed.

    Returns:
        Tuple (rows, summary, unresolved sample indices)
    """
    if r_audit is None:
        r_audit = min(AUDIT_EDGE_FACTOR * sampled.median_edge, delta)
    if not r_audit > 0:
        raise DegenerateBallError(f"audit scale {r_audit} is not positive")
    err = np.abs(g_values - f.values)
    lipa_g = _ball_lipschitz(g_values, sampled, r_audit)
    lipf = _ball_edge_lipschitz(f.values, sampled, delta)
    support = np.flatnonzero(f.values != 0)
    if len(support):
        to_support = dijkstra(sampled.graph, directed=False, indices=support, min_only=True)
    else:
        to_support = np.full(sampled.n, math.inf)
    far = to_support > delta + sampled.max_edge

    rows, unresolved = [], []
    for x in range(sampled.n):
        resolved = not math.isnan(lipa_g[x])
        if not resolved:
            unresolved.append(x)
        lip_ok = resolved and lipa_g[x] <= lipf[x] + LAMBDA_SLACK * lam
        rows.append({
            "index": x,
            "err_abs": float(err[x]),
            "lipa_g": float(lipa_g[x]),
            "lipf_ball": float(lipf[x]),
            "bound_ok": bool(err[x] <= eps and lip_ok),
            "support_ok": bool(not far[x] or g_values[x] == 0.0),
            "lip_ok": bool(lip_ok),
            "resolved": resolved,
        })
    resolved_rows = [row for row in rows if row["resolved"]]
    lip_fraction = (sum(row["lip_ok"] for row in resolved_rows) / len(resolved_rows)) if resolved_rows else 0.0
    err_fail = [row["index"] for row in rows if row["err_abs"] > eps]
    lip_fail = [row["index"] for row in resolved_rows if not row["lip_ok"]]
    support_fail = [row["index"] for row in rows if not row["support_ok"]]
    summary = {
        "r_audit": float(r_audit),
        "max_err": float(np.max(err, initial=0.0)),
        "err_failures": len(err_fail),
        "lip_fraction": float(lip_fraction),
        "lip_failures": len(lip_fail),
        "support_failures": len(support_fail),
        "unresolved": len(unresolved),
        "witness": {"err": err_fail[:1], "lip": lip_fail[:1], "support": support_fail[:1]},
    }
    summary["passed"] = not err_fail and not support_fail and lip_fraction >= LIP_PASS_FRACTION
    return rows, summary, unresolved


def smooth_approximate(sampled, f: ScalarField, delta: float, eps: float, lam: float, seed: int = 0):
    """
    Smooth f into g with |g - f| <= eps and lip_a(g) <= Lip(f; B_delta) + lam.

    Args:
        sampled: SampledManifold
        f: ScalarField, Lipschitz on the graph
        delta: Support enlargement and Lipschitz ball radius (> 0)
        eps: Sup-norm tolerance (> 0)
        lam: Lipschitz slack (> 0)
        seed: Seed for the cover order and the chart probes

    Returns:
        Tuple (g, SmoothingReport); g carries the smoothed function as its
        closed form
    """
    smoothed, plan = build_smoothing(sampled, f, delta, eps, lam, seed=seed)
    g_values = smoothed.at_samples()
    g = ScalarField(g_values, smoothed, f"smooth({f.tag})")
    rows, summary, unresolved = audit_smoothing(sampled, f, g_values, delta, eps, lam)
    plan_problems = plan.check()
    summary["plan_violations"] = len(plan_problems)
    summary["estimate_failures"] = len(plan.estimate_failures())
    summary["passed"] = summary["passed"] and not plan_problems
    params = {"delta": delta, "eps": eps, "lambda": lam, "seed": seed, "r": plan.r, "charts": len(plan.charts),
              "function": f.tag, "n": sampled.n, "r_audit": summary["r_audit"]}
    if not summary["passed"]:
        logger.warning("smoothing audit failed: %s", summary["witness"])
    else:
        logger.info("smoothing audit passed: max |g - f| = %.3g, Lip bound at %.1f%% of samples",
                    summary["max_err"], 100.0 * summary["lip_fraction"])
    return g, SmoothingReport(params, rows, summary, plan, unresolved)
