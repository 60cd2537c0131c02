"""
Discrete mollification on chart grids.

The kernel is the exponential bump of radius 1/k sampled on the grid h Z^n
and normalized to unit discrete mass. Grid values are computed lazily and
cached, so only nodes near evaluation points are ever convolved; values
between nodes come from Keys cubic convolution (a = -0.5), which reproduces
quadratics and is C^1.
"""
import itertools
import logging
from collections import OrderedDict

import numpy as np

from core.errors import InputError
from smoothing.partition import bump

logger = logging.getLogger(__name__)

KEYS_A = -0.5
KEYS_OFFSETS = np.array([-1, 0, 1, 2])
# relative slack on the coarseness check, absorbing 1 / (4 k) rounding
GRID_SLACK = 1e-12
NODE_CACHE_SIZE = 100_000


def keys_kernel(x) -> np.ndarray:
    x = np.abs(np.asarray(x, dtype=float))
    a = KEYS_A
    out = np.zeros_like(x)
    near = x <= 1.0
    far = (x > 1.0) & (x < 2.0)
    out[near] = (a + 2.0) * x[near] ** 3 - (a + 3.0) * x[near] ** 2 + 1.0
    out[far] = a * x[far] ** 3 - 5.0 * a * x[far] ** 2 + 8.0 * a * x[far] - 4.0 * a
    return out


def kernel_stencil(k: int, grid_step: float, dim: int):
    """Integer offsets l with |l h| < 1/k and their normalized kernel weights."""
    reach = int(np.ceil(1.0 / (k * grid_step)))
    axis = np.arange(-reach, reach + 1)
    offsets = np.array(list(itertools.product(axis, repeat=dim)), dtype=int).reshape(-1, dim)
    t = np.linalg.norm(offsets * grid_step, axis=1) * k
    weights = bump(t)
    keep = weights > 0
    offsets, weights = offsets[keep], weights[keep]
    return offsets, weights / np.sum(weights)


class _NodeCache:
    """Values of a function on integer grid nodes, filled on demand; least recently used nodes go first."""

    def __init__(self, compute, max_nodes: int = NODE_CACHE_SIZE):
        if max_nodes < 1:
            raise InputError(f"node cache needs room for at least one node, got {max_nodes}")
        self._compute = compute
        self._max_nodes = int(max_nodes)
        self._values = OrderedDict()

    def __len__(self):
        return len(self._values)

    def get(self, nodes: np.ndarray) -> np.ndarray:
        keys = [tuple(row) for row in nodes.tolist()]
        cached = self._values
        missing = [i for i, key in enumerate(keys) if key not in cached]
        fresh = {}
        if missing:
            unique = np.unique(nodes[missing], axis=0)
            fresh = dict(zip(map(tuple, unique.tolist()), map(float, self._compute(unique))))
        out = np.array([fresh[key] if key in fresh else cached[key] for key in keys])
        for key in keys:
            if key in cached:
                cached.move_to_end(key)
        cached.update(fresh)
        while len(cached) > self._max_nodes:
            cached.popitem(last=False)
        return out


class MollifiedFunction:
    """
    g = f * rho_k on the grid h Z^n, interpolated between nodes.

    Attributes:
        func: Chart function on (m, dim) arrays of chart vectors
        k: Kernel scale, support radius 1/k
        grid_step: Node spacing h
        cache_size: Most grid nodes kept per cache
    """

    def __init__(self, func, k: int, grid_step: float, dim: int, cache_size: int = NODE_CACHE_SIZE):
        self.func = func
        self.k = int(k)
        self.grid_step = float(grid_step)
        self.dim = int(dim)
        self.offsets, self.weights = kernel_stencil(self.k, self.grid_step, self.dim)
        self._func_nodes = _NodeCache(lambda nodes: func(nodes * self.grid_step), cache_size)
        self._grid = _NodeCache(self._convolve, cache_size)

    def _convolve(self, nodes: np.ndarray) -> np.ndarray:
        stencil = nodes[:, None, :] + self.offsets[None, :, :]
        values = self._func_nodes.get(stencil.reshape(-1, self.dim)).reshape(len(nodes), -1)
        return values @ self.weights

    def node_values(self, nodes) -> np.ndarray:
        return self._grid.get(np.asarray(nodes, dtype=np.int64).reshape(-1, self.dim))

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        single = u.ndim == 1
        u = u.reshape(-1, self.dim)
        s = u / self.grid_step
        base = np.floor(s).astype(np.int64)
        frac = s - base
        # per-axis Keys weights for nodes base + (-1, 0, 1, 2)
        axis_weights = keys_kernel(frac[:, :, None] - KEYS_OFFSETS[None, None, :])
        corners = np.array(list(itertools.product(range(4), repeat=self.dim)), dtype=int)
        weights = np.ones((len(u), len(corners)))
        for d in range(self.dim):
            weights *= axis_weights[:, d, corners[:, d]]
        nodes = base[:, None, :] + KEYS_OFFSETS[corners][None, :, :]
        values = self.node_values(nodes.reshape(-1, self.dim)).reshape(len(u), len(corners))
        out = np.sum(weights * values, axis=1)
        return out[0] if single else out

    @property
    def cached_nodes(self) -> int:
        return len(self._grid)


def mollify(func, k: int, grid_step: float, dim: int = None) -> MollifiedFunction:
    """
    Mollify a chart function at scale k.

    Args:
        func: Callable on (m, dim) arrays of chart vectors; its dim attribute
            is used when dim is omitted
        k: Positive integer scale
        grid_step: Grid spacing, at most 1/(4k)
        dim: Chart dimension

    Returns:
        MollifiedFunction
    """
    if int(k) != k or k < 1:
        raise InputError(f"mollifier scale must be a positive integer, got {k}")
    if not grid_step > 0:
        raise InputError(f"grid step must be positive, got {grid_step}")
    if grid_step > (1.0 + GRID_SLACK) / (4.0 * k):
        raise InputError(f"grid step {grid_step:.6g} is too coarse for k={k}; need at most {1.0 / (4.0 * k):.6g}")
    dim = dim if dim is not None else getattr(func, "dim", None)
    if dim is None:
        raise InputError("chart dimension is unknown; pass dim")
    return MollifiedFunction(func, int(k), grid_step, dim)
