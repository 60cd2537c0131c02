"""
Partitions of unity subordinate to a chart cover.

Each chart carries the radial bump b(t) = exp(1 - 1/(1 - t^2)) for t < 1 in
the normalized distance t = d(c_i, y) / r_i; psi_i = b_i / sum_j b_j.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, csc_matrix, csr_matrix

from core.errors import ConstructionError
from smoothing.cover import CoverData, chart_reach, coordinate_gaps

logger = logging.getLogger(__name__)


def bump(t) -> np.ndarray:
    t = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    inside = t < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


def _bump_slope(nodes: int = 20001) -> float:
    t = np.linspace(0.0, 1.0, nodes)[:-1]
    b = bump(t)
    return float(np.max(b * 2.0 * t / (1.0 - t * t) ** 2))


# max |b'(t)|, attained near t = 0.76
BUMP_SLOPE = _bump_slope()


@dataclass(eq=False)
class PartitionOfUnity:
    cover: CoverData
    at_samples: csr_matrix
    lip: np.ndarray

    @property
    def size(self) -> int:
        return self.cover.size

    def raw_bumps(self, points) -> csr_matrix:
        """b_i at arbitrary manifold points, shape (len(points), charts)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        charts = self.cover.charts
        manifold = charts[0].manifold
        centers = np.array([c.center for c in charts])
        reach = np.array([chart_reach(c) for c in charts])
        gaps = coordinate_gaps(manifold, points, centers)
        rows, cols, vals = [], [], []
        for c in np.flatnonzero(np.any(gaps < reach[None, :], axis=0)):
            idx = np.flatnonzero(gaps[:, c] < reach[c])
            dist = np.atleast_1d(manifold.distance(charts[c].center, points[idx]))
            b = bump(dist / charts[c].radius)
            keep = b > 0
            rows.append(idx[keep])
            cols.append(np.full(int(keep.sum()), c))
            vals.append(b[keep])
        if not rows:
            return csr_matrix((len(points), self.size))
        return coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(len(points), self.size)).tocsr()

    def evaluate(self, points):
        """
        psi at arbitrary points.

        Returns:
            Tuple (csc matrix of shape (len(points), charts), covered mask);
            rows of uncovered points are zero
        """
        raw = self.raw_bumps(points)
        return _normalize(raw)


def _normalize(raw: csr_matrix):
    total = np.asarray(raw.sum(axis=1)).reshape(-1)
    covered = total > 0
    scale = np.zeros_like(total)
    scale[covered] = 1.0 / total[covered]
    psi = csr_matrix(raw.multiply(scale[:, None]))
    return csc_matrix(psi), covered


def _sample_bumps(cover: CoverData, n: int) -> csr_matrix:
    rows = np.concatenate(cover.members)
    cols = np.concatenate([np.full(len(m), c) for c, m in enumerate(cover.members)])
    t = np.concatenate([d / chart.radius for d, chart in zip(cover.member_dist, cover.charts)])
    return coo_matrix((bump(t), (rows, cols)), shape=(n, cover.size)).tocsr()


def build_partition(cover: CoverData, sampled) -> PartitionOfUnity:
    """
    Normalized bumps over the cover, with Lipschitz bounds.

    Lip(psi_i) is the largest difference quotient of psi_i along graph edges
    touching the chart, floored at BUMP_SLOPE / r_i.

    Args:
        cover: CoverData
        sampled: SampledManifold the cover was built on

    Returns:
        PartitionOfUnity evaluable at samples and at arbitrary points
    """
    psi, covered = _normalize(_sample_bumps(cover, sampled.n))
    if not np.all(covered):
        hole = int(np.flatnonzero(~covered)[0])
        raise ConstructionError(f"bump sum vanishes at sample {hole}; the cover has a hole")
    rows, cols, lengths = sampled.edges()
    lip = np.empty(cover.size)
    for c in range(cover.size):
        column = psi[:, c].toarray().reshape(-1)
        touching = (column[rows] > 0) | (column[cols] > 0)
        slope = np.abs(column[rows[touching]] - column[cols[touching]]) / lengths[touching]
        lip[c] = max(float(np.max(slope, initial=0.0)), BUMP_SLOPE / cover.charts[c].radius)
    total = np.asarray(psi.sum(axis=1)).reshape(-1)
    logger.info("partition of unity over %d charts, max |sum - 1| = %.3g", cover.size,
                float(np.max(np.abs(total - 1.0))))
    return PartitionOfUnity(cover, psi.tocsr(), lip)
