"""
Lipschitz estimators on the sample graph.

    lip_pointwise_est   neighbour slope, the discrete lip(f)(x)
    lip_a_est           Lip(f; B_r(x)) at one scale r
    lip_global          Lip(f; E) with graph distances

On the full sample set lip_global is the maximal edge slope: along a
shortest path |f(x) - f(y)| is bounded by the sum of edge increments.
"""
import logging

import numpy as np
from scipy.sparse.csgraph import dijkstra

from core.errors import DegenerateBallError, InputError, NumericError
from metricgraph.distances import ball

logger = logging.getLogger(__name__)


def _values(f, sampled) -> np.ndarray:
    values = np.asarray(getattr(f, "values", f), dtype=float)
    if values.shape != (sampled.n,):
        raise InputError(f"field has {values.shape} values for {sampled.n} samples")
    return values


def edge_slopes(f, sampled) -> np.ndarray:
    values = _values(f, sampled)
    rows, cols, lengths = sampled.edges()
    return np.abs(values[rows] - values[cols]) / lengths


def lip_global(f, sampled, subset=None) -> float:
    """
    max |f(x) - f(y)| / d_graph(x, y) over pairs in subset.

    Args:
        f: ScalarField or array of sample values
        sampled: SampledManifold
        subset: Sample indices (all samples when omitted); at least two
    """
    values = _values(f, sampled)
    if subset is not None:
        subset = np.unique(np.asarray(subset, dtype=int))
    if subset is None or len(subset) == sampled.n:
        slopes = edge_slopes(values, sampled)
        return float(slopes.max()) if len(slopes) else 0.0
    if len(subset) < 2:
        raise InputError("Lipschitz constant needs at least two points")
    dist = dijkstra(sampled.graph, directed=False, indices=subset)[:, subset]
    diff = np.abs(values[subset][:, None] - values[subset][None, :])
    off = ~np.eye(len(subset), dtype=bool)
    return float(np.max(diff[off] / dist[off]))


def lip_a_est(f, sampled, x: int, r: float) -> float:
    """Lip(f; B_r(x)) over the closed graph ball."""
    if not r > 0:
        raise InputError(f"scale must be positive, got {r}")
    members = ball(sampled, x, r)
    if len(members) < 2:
        raise DegenerateBallError(f"graph ball of radius {r:.4g} at sample {x} holds {len(members)} point(s)")
    return lip_global(f, sampled, members)


def lip_pointwise_est(f, sampled, x: int) -> float:
    values = _values(f, sampled)
    idx, lengths = sampled.neighbours(int(x))
    if len(idx) == 0:
        raise DegenerateBallError(f"sample {x} has no neighbours")
    return float(np.max(np.abs(values[idx] - values[x]) / lengths))


def lipa_scale_sweep(f, sampled, x: int, radii) -> list:
    """
    lip_a_est over a list of graph radii.

    Each row reports the graph radius and the realized manifold radius, the
    largest manifold distance from x to a ball member; balls with fewer than
    two members are reported unresolved.
    """
    rows = []
    for r in sorted(float(r) for r in radii):
        members = ball(sampled, x, r)
        row = {"graph_radius": r, "ball_size": int(len(members)), "resolved": len(members) >= 2,
               "lip_a": float("nan"), "manifold_radius": float("nan")}
        if row["resolved"]:
            row["lip_a"] = lip_global(f, sampled, members)
            try:
                row["manifold_radius"] = float(np.max(sampled.manifold.distance(sampled.points[x],
                                                                                sampled.points[members])))
            except NumericError as e:
                logger.warning("manifold radius at scale %.4g unavailable: %s", r, e)
        rows.append(row)
    return rows
