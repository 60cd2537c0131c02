"""
Sampled manifolds: weighted point clouds with a k-nearest-neighbour Finsler graph.

Neighbours are found by chunked brute force on coordinate displacements
(minimal images on the torus, chords on the sphere). Edge lengths integrate
F along the chart segment with an 8-point midpoint rule. A coarse atlas of
biLipschitz charts is laid over the graph so that every edge lies in a chart.
"""
import math
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial.distance import cdist

from core.errors import ConstructionError, InputError
from manifold.charts import bilipschitz_radius, build_chart
from manifold.registry import manifold_from_dict
from manifold.specs import Manifold
from metricgraph.measure import WeightedMeasure, build_measure

logger = logging.getLogger(__name__)

DEFAULT_K = 12
QUADRATURE_NODES = 8
NEIGHBOUR_CHUNK = 512
ATLAS_TOLERANCE = 0.5
ATLAS_BUDGET = 64


@dataclass(eq=False)
class SampledManifold:
    manifold: Manifold
    points: np.ndarray
    measure: WeightedMeasure
    graph: csr_matrix
    k: int
    seed: int = 0
    charts: list = field(default_factory=list)
    chart_of: np.ndarray = None
    chart_members: list = field(default_factory=list)
    chart_centers: list = field(default_factory=list)
    measure_spec: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def weights(self) -> np.ndarray:
        return self.measure.weights

    @property
    def total_mass(self) -> float:
        return self.measure.total_mass

    def edges(self):
        """Edges i < j with their lengths."""
        upper = self.graph.tocoo()
        keep = upper.row < upper.col
        return upper.row[keep], upper.col[keep], upper.data[keep]

    def neighbours(self, i: int):
        start, end = self.graph.indptr[i], self.graph.indptr[i + 1]
        return self.graph.indices[start:end], self.graph.data[start:end]

    @property
    def max_edge(self) -> float:
        return float(self.graph.data.max()) if self.graph.nnz else 0.0

    @property
    def median_edge(self) -> float:
        return float(np.median(self.edges()[2])) if self.graph.nnz else 0.0

    def charts_containing(self, i: int) -> list:
        return [c for c, members in enumerate(self.chart_members) if i in members]

    def to_dict(self) -> dict:
        rows, cols, lengths = self.edges()
        return {
            "manifold": self.manifold.to_dict(),
            "k": self.k,
            "seed": self.seed,
            "measure": self.measure_spec,
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
            "edges": [[int(i), int(j), float(w)] for i, j, w in zip(rows, cols, lengths)],
            "charts": [{"center_index": int(c_idx), **chart.to_dict()}
                       for c_idx, chart in zip(self.chart_centers, self.charts)],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SampledManifold":
        manifold = manifold_from_dict(doc["manifold"])
        points = np.asarray(doc["points"], dtype=float)
        edges = np.asarray(doc["edges"], dtype=float).reshape(-1, 3)
        graph = _symmetric_graph(len(points), edges[:, 0].astype(int), edges[:, 1].astype(int), edges[:, 2])
        charts = [build_chart(manifold, c["center"], c["radius"], c["bilip_constant"],
                              c.get("measured_distortion", math.nan))
                  for c in doc.get("charts", [])]
        centers = [int(c["center_index"]) for c in doc.get("charts", [])]
        members, chart_of = _memberships(graph, centers, [c.radius for c in charts])
        return cls(manifold, points, WeightedMeasure(doc["weights"]), graph, int(doc["k"]), int(doc.get("seed", 0)),
                   charts, chart_of, members, centers, dict(doc.get("measure", {})))


def _symmetric_graph(n: int, rows, cols, lengths) -> csr_matrix:
    both_r = np.concatenate([rows, cols])
    both_c = np.concatenate([cols, rows])
    both_w = np.concatenate([lengths, lengths])
    return coo_matrix((both_w, (both_r, both_c)), shape=(n, n)).tocsr()


def neighbour_pairs(manifold: Manifold, points: np.ndarray, k: int):
    """Symmetrized k-nearest-neighbour index pairs i < j in coordinate distance."""
    n = len(points)
    pairs = []
    for start in range(0, n, NEIGHBOUR_CHUNK):
        block = points[start:start + NEIGHBOUR_CHUNK]
        if manifold.periodic:
            dist = np.linalg.norm(manifold.displacement(block[:, None, :], points[None, :, :]), axis=-1)
        else:
            dist = cdist(block, points)
        rows = np.arange(len(block))
        dist[rows, start + rows] = np.inf
        nearest = np.argpartition(dist, k - 1, axis=1)[:, :k]
        src = np.repeat(start + rows, k)
        pairs.append(np.stack([src, nearest.reshape(-1)], axis=1))
    pairs = np.sort(np.vstack(pairs), axis=1)
    return np.unique(pairs, axis=0)


def edge_lengths(manifold: Manifold, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Midpoint-rule length of the chart segment from p to q."""
    s = (np.arange(QUADRATURE_NODES) + 0.5) / QUADRATURE_NODES
    pts, vel = manifold.segment(p, q, s)
    return np.mean(manifold.finsler(pts, vel), axis=-1)


def _memberships(graph: csr_matrix, center_indices, radii):
    n = graph.shape[0]
    members = []
    chart_of = np.full(n, -1)
    best = np.full(n, np.inf)
    for c, (idx, r) in enumerate(zip(center_indices, radii)):
        dist = dijkstra(graph, directed=False, indices=idx, limit=r)
        inside = np.flatnonzero(dist < r)
        members.append(inside)
        closer = dist[inside] < best[inside]
        chart_of[inside[closer]] = c
        best[inside[closer]] = dist[inside][closer]
    return members, chart_of


def build_atlas(manifold: Manifold, points: np.ndarray, graph: csr_matrix, seed: int = 0):
    """
    Greedy atlas over the graph.

    Centers are taken in seeded order among uncovered samples. A chart of
    radius r covers the graph ball of radius r/2 and holds the graph ball of
    radius r, so any edge shorter than r/2 lies inside one chart.

    Returns:
        Tuple (charts, center_indices, members, chart_of)
    """
    n = len(points)
    order = np.random.default_rng(seed).permutation(n)
    covered = np.zeros(n, dtype=bool)
    charts, centers = [], []
    for idx in order:
        if covered[idx]:
            continue
        r, distortion = bilipschitz_radius(manifold, points[idx], ATLAS_TOLERANCE, budget=ATLAS_BUDGET, seed=seed)
        charts.append(build_chart(manifold, points[idx], r, 1.0 + ATLAS_TOLERANCE, distortion))
        centers.append(int(idx))
        dist = dijkstra(graph, directed=False, indices=int(idx), limit=0.5 * r)
        covered |= dist < 0.5 * r
    members, chart_of = _memberships(graph, centers, [c.radius for c in charts])

    # edges too long for the half-radius argument get a chart at their endpoint
    rows, cols = graph.nonzero()
    member_sets = [set(m.tolist()) for m in members]
    for i, j in zip(rows, cols):
        if i > j or any(i in s and j in s for s in member_sets):
            continue
        r, distortion = bilipschitz_radius(manifold, points[i], ATLAS_TOLERANCE, budget=ATLAS_BUDGET, seed=seed)
        if graph[i, j] >= r:
            raise ConstructionError(f"edge ({i}, {j}) of length {graph[i, j]:.4g} exceeds the chart radius {r:.4g}; "
                                    "increase n or decrease k")
        charts.append(build_chart(manifold, points[i], r, 1.0 + ATLAS_TOLERANCE, distortion))
        centers.append(int(i))
        dist = dijkstra(graph, directed=False, indices=int(i), limit=r)
        member_sets.append(set(np.flatnonzero(dist < r).tolist()))
    if len(member_sets) > len(members):
        members, chart_of = _memberships(graph, centers, [c.radius for c in charts])
    logger.info("atlas of %d charts over %d samples", len(charts), n)
    return charts, centers, members, chart_of


def sample_manifold(manifold: Manifold, n: int, measure_spec: dict | None = None, seed: int = 0,
                    k: int = DEFAULT_K) -> SampledManifold:
    """
    Sample a manifold into a weighted k-NN Finsler graph.

    Args:
        manifold: Manifold kind
        n: Number of density samples (ignored for density "none", where the atoms are the samples)
        measure_spec: Density and atoms (see metricgraph.measure)
        seed: Seed for sampling and random atoms
        k: Neighbours per sample, capped at n - 1

    Returns:
        SampledManifold with a connected graph and a coarse atlas
    """
    measure_spec = dict(measure_spec or {"density": "uniform"})
    density = measure_spec.get("density", "uniform")
    if density != "none" and n < 2:
        raise InputError(f"sampling needs n >= 2, got {n}")
    if k < 1:
        raise InputError(f"k must be positive, got {k}")
    base = manifold.sample_uniform(n, seed) if density != "none" else np.empty((0, manifold.ambient_dim))
    points, weights = build_measure(manifold, base, measure_spec, seed=seed)
    if len(points) < 2:
        raise InputError("a sampled manifold needs at least two distinct points")
    measure = WeightedMeasure(weights)
    k_eff = min(k, len(points) - 1)

    pairs = neighbour_pairs(manifold, points, k_eff)
    lengths = edge_lengths(manifold, points[pairs[:, 0]], points[pairs[:, 1]])
    graph = _symmetric_graph(len(points), pairs[:, 0], pairs[:, 1], lengths)
    n_components, labels = connected_components(graph, directed=False)
    if n_components > 1:
        sizes = np.bincount(labels)
        raise ConstructionError(f"k-NN graph with k={k_eff} has {n_components} components "
                                f"(sizes {sorted(sizes.tolist(), reverse=True)[:5]}); increase k")
    logger.info("sampled %d points on %s: %d edges, median length %.4g",
                len(points), manifold.kind, len(pairs), float(np.median(lengths)))

    charts, centers, members, chart_of = build_atlas(manifold, points, graph, seed=seed)
    return SampledManifold(manifold, points, measure, graph, k_eff, seed, charts, chart_of, members, centers,
                           measure_spec)
