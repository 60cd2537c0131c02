"""
Weighted measures on sample clouds.

A measure spec is a dict:

    density        "uniform" | "wave" | "gaussian" | "none" (default "uniform")
    density_mass   mass carried by the density samples (default 1, may be 0)
    amplitude, frequency, axis   wave parameters
    center, width                gaussian parameters
    atoms          [{"point": [...], "mass": m}, ...]
    random_atoms   {"count": c, "mass": m}, placed on existing density samples
"""
import logging
from dataclasses import dataclass

import numpy as np

from core.errors import InputError
from manifold.specs import Manifold

logger = logging.getLogger(__name__)

DENSITIES = ("uniform", "wave", "gaussian", "none")
# duplicate points are merged on this coordinate grid
MERGE_DECIMALS = 12


@dataclass
class WeightedMeasure:
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise InputError("measure weights must be finite and non-negative")
        if self.total_mass <= 0:
            raise InputError("measure has zero total mass")

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * np.asarray(values, dtype=float)))

    def l2_norm(self, values) -> float:
        values = np.asarray(values, dtype=float)
        return float(np.sqrt(np.sum(self.weights * values * values)))

    def support(self, tol: float = 0.0) -> np.ndarray:
        return np.flatnonzero(self.weights > tol)


def density_values(manifold: Manifold, points: np.ndarray, spec: dict) -> np.ndarray:
    kind = spec.get("density", "uniform")
    if kind == "uniform":
        return np.ones(len(points))
    if kind == "wave":
        amplitude = float(spec.get("amplitude", 0.5))
        frequency = float(spec.get("frequency", 2.0 * np.pi))
        axis = int(spec.get("axis", 0))
        if not 0.0 <= amplitude < 1.0:
            raise InputError(f"wave density amplitude must lie in [0, 1), got {amplitude}")
        if not 0 <= axis < manifold.ambient_dim:
            raise InputError(f"wave density axis {axis} out of range")
        return 1.0 + amplitude * np.cos(frequency * points[:, axis])
    if kind == "gaussian":
        center = np.asarray(spec.get("center", np.zeros(manifold.ambient_dim)), dtype=float)
        width = float(spec.get("width", 0.25))
        if width <= 0 or center.shape != (manifold.ambient_dim,):
            raise InputError("gaussian density needs a positive width and an ambient center")
        return np.exp(-np.sum((points - center) ** 2, axis=1) / (2.0 * width * width))
    raise InputError(f"unknown density '{kind}'; expected one of {DENSITIES}")


def build_measure(manifold: Manifold, density_points: np.ndarray, spec: dict, seed: int = 0):
    """
    Points and weights for a measure spec.

    Args:
        manifold: Manifold the points live on
        density_points: Samples carrying the density part, shape (n, ambient)
        spec: Measure spec (see module docstring)
        seed: Seed for random atoms

    Returns:
        Tuple (points, weights) with duplicates merged and weights summed
    """
    spec = dict(spec or {})
    kind = spec.get("density", "uniform")
    points = [np.asarray(density_points, dtype=float).reshape(-1, manifold.ambient_dim)]
    weights = [np.zeros(len(points[0]))]
    if kind != "none" and len(points[0]):
        mass = float(spec.get("density_mass", 1.0))
        if mass < 0:
            raise InputError(f"density_mass must be non-negative, got {mass}")
        raw = density_values(manifold, points[0], spec) * manifold.area_element(points[0])
        if mass > 0:
            weights[0] = mass * raw / np.sum(raw)

    random_atoms = spec.get("random_atoms")
    if random_atoms:
        count = int(random_atoms.get("count", 1))
        atom_mass = float(random_atoms.get("mass", 1.0))
        if count < 1 or count > len(points[0]) or atom_mass < 0:
            raise InputError("random_atoms needs 1 <= count <= n and a non-negative mass")
        chosen = np.random.default_rng(seed).choice(len(points[0]), size=count, replace=False)
        weights[0] = weights[0].copy()
        weights[0][chosen] += atom_mass

    for atom in spec.get("atoms", []):
        point = manifold.project(np.asarray(atom["point"], dtype=float))
        if point.shape != (manifold.ambient_dim,) or not manifold.contains(point):
            raise InputError(f"atom {atom['point']} is not a point of the {manifold.kind} manifold")
        atom_mass = float(atom.get("mass", 1.0))
        if atom_mass < 0:
            raise InputError("atom masses must be non-negative")
        points.append(point[None, :])
        weights.append(np.array([atom_mass]))

    points = np.vstack(points)
    weights = np.concatenate(weights)
    keys, first, inverse = np.unique(np.round(points, MERGE_DECIMALS), axis=0, return_index=True,
                                     return_inverse=True)
    inverse = inverse.reshape(-1)
    if len(keys) < len(points):
        logger.info("merged %d duplicate sample points", len(points) - len(keys))
    merged = np.bincount(inverse, weights=weights, minlength=len(keys))
    order = np.argsort(first)
    return points[first[order]], merged[order]
