"""Shortest-path distances on the sample graph."""
import logging

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import dijkstra

from core.errors import InputError

logger = logging.getLogger(__name__)

SOURCE_CHUNK = 256


def _indices(sampled, idx, name: str) -> np.ndarray:
    idx = np.atleast_1d(np.asarray(idx))
    if idx.dtype.kind not in "iu" or np.any(idx < 0) or np.any(idx >= sampled.n):
        raise InputError(f"{name} must be sample indices in [0, {sampled.n})")
    return idx.astype(int)


def graph_distance(sampled, sources, targets=None) -> np.ndarray:
    """
    Multi-source Dijkstra distances.

    Args:
        sampled: SampledManifold
        sources: Source sample indices
        targets: Target sample indices (all samples when omitted)

    Returns:
        Matrix of shape (len(sources), len(targets)); unreachable pairs are inf
    """
    sources = _indices(sampled, sources, "sources")
    targets = np.arange(sampled.n) if targets is None else _indices(sampled, targets, "targets")
    out = np.empty((len(sources), len(targets)))
    for start in range(0, len(sources), SOURCE_CHUNK):
        chunk = sources[start:start + SOURCE_CHUNK]
        out[start:start + len(chunk)] = dijkstra(sampled.graph, directed=False, indices=chunk)[:, targets]
    if not np.all(np.isfinite(out)):
        logger.warning("graph distance found unreachable targets")
    return out


def local_distances(sampled, radius: float, sources=None) -> csr_matrix:
    """Sparse matrix of graph distances <= radius; the diagonal is stored explicitly."""
    if not radius > 0:
        raise InputError(f"radius must be positive, got {radius}")
    sources = np.arange(sampled.n) if sources is None else _indices(sampled, sources, "sources")
    rows, cols, vals = [], [], []
    for start in range(0, len(sources), SOURCE_CHUNK):
        chunk = sources[start:start + SOURCE_CHUNK]
        dist = dijkstra(sampled.graph, directed=False, indices=chunk, limit=radius)
        r, c = np.nonzero(np.isfinite(dist))
        rows.append(start + r)
        cols.append(c)
        vals.append(dist[r, c])
    return coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(len(sources), sampled.n)).tocsr()


def ball(sampled, center: int, radius: float) -> np.ndarray:
    """Indices of the closed graph ball."""
    dist = dijkstra(sampled.graph, directed=False, indices=int(center), limit=radius)
    return np.flatnonzero(dist <= radius)


def distance_rows(sampled, sources, targets) -> list:
    """Rows (src, dst, distance) for every source/target pair."""
    sources = _indices(sampled, sources, "sources")
    targets = _indices(sampled, targets, "targets")
    dist = graph_distance(sampled, sources, targets)
    return [[int(s), int(t), float(dist[a, b])] for a, s in enumerate(sources) for b, t in enumerate(targets)]
