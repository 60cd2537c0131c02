"""
Chart covers of a sampled manifold for the smoothing construction.

The cover parameter r is the smaller of delta/2 and the largest lattice value
lam * 2^-j with (2r + r^2) Lip(f) + r <= lam. Charts are centred at samples
taken in seeded order; a sample counts as covered once it lies within 2/3 of
some chart radius, so every bump is bounded away from zero at every sample.
"""
import math
import logging
from dataclasses import dataclass, field

import numpy as np

from core.errors import ConstructionError, InputError
from manifold.charts import ChartData, bilipschitz_radius, build_chart
from manifold.specs import Manifold
from metricgraph.lipschitz import lip_global

logger = logging.getLogger(__name__)

OVERLAP_CAP = 16
CHART_RADIUS_FRACTION = 0.9
COVERAGE_FRACTION = 2.0 / 3.0
COVER_BUDGET = 64
RADIUS_LATTICE_DEPTH = 60
# coordinate prefilter slack on top of frame and norm-equivalence stretch
REACH_SLACK = 1.25
PREFILTER_CHUNK = 1024


def admissible_radius(lip: float, lam: float, delta: float) -> float:
    """min(delta/2, largest lam * 2^-j with (2r + r^2) lip + r <= lam)."""
    if not (delta > 0 and lam > 0):
        raise InputError(f"delta and lambda must be positive, got delta={delta}, lambda={lam}")
    if not math.isfinite(lip) or lip < 0:
        raise InputError(f"admissibility needs a finite Lipschitz constant, got {lip}")
    for j in range(RADIUS_LATTICE_DEPTH + 1):
        r = lam * 2.0 ** -j
        if (2.0 * r + r * r) * lip + r <= lam:
            return min(0.5 * delta, r)
    raise InputError(f"no lattice radius down to {lam * 2.0 ** -RADIUS_LATTICE_DEPTH:.3g} "
                     f"is admissible for Lip(f) = {lip:.6g}")


def chart_reach(chart: ChartData) -> float:
    """Coordinate radius that contains the chart ball."""
    stretch = float(np.linalg.norm(chart.frame, ord=2))
    return chart.radius * stretch * chart.equiv_constant * chart.bilip_constant * REACH_SLACK


def coordinate_gaps(manifold: Manifold, points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Coordinate displacement lengths, shape (len(points), len(centers))."""
    out = np.empty((len(points), len(centers)))
    for start in range(0, len(points), PREFILTER_CHUNK):
        block = points[start:start + PREFILTER_CHUNK]
        disp = manifold.displacement(block[:, None, :], centers[None, :, :])
        out[start:start + len(block)] = np.linalg.norm(disp, axis=-1)
    return out


def chart_distances(chart: ChartData, points: np.ndarray):
    """Indices of points within the chart ball and their manifold distances to the center."""
    gaps = np.linalg.norm(chart.manifold.displacement(chart.center, points), axis=-1)
    candidates = np.flatnonzero(gaps < chart_reach(chart))
    if len(candidates) == 0:
        return candidates, np.empty(0)
    dist = np.atleast_1d(chart.manifold.distance(chart.center, points[candidates]))
    inside = dist < chart.radius
    return candidates[inside], dist[inside]


@dataclass(eq=False)
class CoverData:
    charts: list
    centers: np.ndarray
    members: list
    member_dist: list
    adjacency: list
    n_i: np.ndarray
    m_i: np.ndarray
    r: float
    lip_f: float = math.nan
    delta: float = math.nan
    lam: float = math.nan
    overlap: np.ndarray = field(default=None)

    @property
    def size(self) -> int:
        return len(self.charts)

    @property
    def radii(self) -> np.ndarray:
        return np.array([c.radius for c in self.charts])

    def check(self) -> list:
        """Problems with coverage, adjacency or admissibility; empty when valid."""
        problems = []
        uncovered = np.flatnonzero(self.overlap == 0)
        if len(uncovered):
            problems.append(f"{len(uncovered)} samples outside every chart, first {int(uncovered[0])}")
        for i, adjacent in enumerate(self.adjacency):
            for j in adjacent:
                if self.n_i[i] > self.m_i[j]:
                    problems.append(f"n_{i} = {self.n_i[i]} exceeds m_{j} = {self.m_i[j]}")
        if math.isfinite(self.lip_f) and (2 * self.r + self.r ** 2) * self.lip_f + self.r > self.lam * (1 + 1e-12):
            problems.append(f"r = {self.r:.6g} is not admissible for Lip(f) = {self.lip_f:.6g}")
        return problems

    def to_dict(self) -> dict:
        return {
            "charts": self.size,
            "r": self.r,
            "lip_f": self.lip_f,
            "delta": self.delta,
            "lambda": self.lam,
            "max_overlap": int(np.max(self.overlap, initial=0)),
            "max_m": int(np.max(self.m_i, initial=0)),
            "radii": {"min": float(np.min(self.radii)), "max": float(np.max(self.radii))},
        }


def cover_from_charts(sampled, charts: list, r: float, lip_f: float = math.nan, delta: float = math.nan,
                      lam: float = math.nan, centers=None, overlap_cap: int = OVERLAP_CAP) -> CoverData:
    """
    Memberships, adjacency and overlap counts for a list of charts.

    Two charts are adjacent when their balls can meet: d(c_i, c_j) < r_i + r_j
    or they share a sample. n_i counts the charts adjacent to i (itself
    included) and m_i is the largest n_j over the charts adjacent to i.
    """
    if not charts:
        raise ConstructionError("a cover needs at least one chart")
    manifold = sampled.manifold
    points = sampled.points
    members, member_dist = [], []
    overlap = np.zeros(sampled.n, dtype=int)
    for chart in charts:
        idx, dist = chart_distances(chart, points)
        members.append(idx)
        member_dist.append(dist)
        overlap[idx] += 1
    if np.max(overlap) > overlap_cap:
        worst = int(np.argmax(overlap))
        raise ConstructionError(f"sample {worst} lies in {int(overlap[worst])} charts, above the cap of {overlap_cap}")

    centers_xyz = np.array([c.center for c in charts])
    reach = np.array([chart_reach(c) for c in charts])
    radii = np.array([c.radius for c in charts])
    gaps = coordinate_gaps(manifold, centers_xyz, centers_xyz)
    adjacency = []
    for i, chart in enumerate(charts):
        candidates = np.flatnonzero(gaps[i] < reach[i] + reach)
        dist = np.atleast_1d(manifold.distance(chart.center, centers_xyz[candidates]))
        adjacency.append(set(candidates[dist < radii[i] + radii[candidates]].tolist()) | {i})
    owners = [[] for _ in range(sampled.n)]
    for c, idx in enumerate(members):
        for s in idx:
            owners[s].append(c)
    for shared in owners:
        for a in shared:
            adjacency[a].update(shared)
    for i in range(len(charts)):
        for j in list(adjacency[i]):
            adjacency[j].add(i)
    adjacency = [np.array(sorted(a), dtype=int) for a in adjacency]
    n_i = np.array([len(a) for a in adjacency])
    m_i = np.array([int(np.max(n_i[a])) for a in adjacency])
    if centers is None:
        centers = np.full(len(charts), -1)
    return CoverData(list(charts), np.asarray(centers, dtype=int), members, member_dist, adjacency, n_i, m_i,
                     float(r), float(lip_f), float(delta), float(lam), overlap)


def build_cover(sampled, f, delta: float, lam: float, seed: int = 0, overlap_cap: int = OVERLAP_CAP,
                budget: int = COVER_BUDGET) -> CoverData:
    """
    Greedy chart cover for smoothing f at tolerance (delta, lam).

    Args:
        sampled: SampledManifold
        f: ScalarField or sample values
        delta: Support enlargement (> 0)
        lam: Lipschitz slack (> 0)
        seed: Seed for the center order and the radius search
        overlap_cap: Largest number of charts a sample may lie in
        budget: Pair budget of each biLipschitz radius search

    Returns:
        CoverData with every sample inside some chart
    """
    lip = lip_global(f, sampled)
    if not math.isfinite(lip):
        raise InputError(f"Lipschitz estimate of f is not finite ({lip})")
    r = admissible_radius(lip, lam, delta)
    manifold = sampled.manifold
    points = sampled.points
    order = np.random.default_rng(seed).permutation(sampled.n)
    covered = np.zeros(sampled.n, dtype=bool)
    shared_radius = None
    charts, centers = [], []
    for idx in order:
        if covered[idx]:
            continue
        if shared_radius is not None:
            search_r, distortion = shared_radius
        else:
            search_r, distortion = bilipschitz_radius(manifold, points[idx], r, budget=budget, seed=seed)
            if manifold.homogeneous:
                shared_radius = (search_r, distortion)
        radius = min(search_r, CHART_RADIUS_FRACTION * r)
        chart = build_chart(manifold, points[idx], radius, 1.0 + r, distortion)
        charts.append(chart)
        centers.append(int(idx))
        inside, dist = chart_distances(chart, points)
        covered[inside[dist < COVERAGE_FRACTION * radius]] = True
        covered[idx] = True
    cover = cover_from_charts(sampled, charts, r, lip, delta, lam, centers, overlap_cap)
    if np.any(cover.overlap == 0):
        hole = int(np.flatnonzero(cover.overlap == 0)[0])
        raise ConstructionError(f"cover misses sample {hole} after {cover.size} charts")
    logger.info("cover of %d charts: r=%.4g, Lip(f)=%.4g, max overlap %d, max m %d",
                cover.size, r, lip, int(cover.overlap.max()), int(cover.m_i.max()))
    return cover
