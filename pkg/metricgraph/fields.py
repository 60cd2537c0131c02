"""
Scalar fields on sample clouds and the named test functions of data/functions.json.

A field holds its values at the samples. Analytic test functions also carry
a closed form, a callable on stacks of manifold points, which the smoothing
and differential code prefers over the sampled values.
"""
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.sparse.csgraph import dijkstra

from core.errors import InputError
from core.settings import load_registry, registry_entry

logger = logging.getLogger(__name__)

FUNCTION_KINDS = ("zero", "constant", "linear", "coordinate", "cone", "distance", "truncated_distance", "fourier")


@dataclass(eq=False)
class ScalarField:
    values: np.ndarray
    closed_form: Callable | None = None
    tag: str | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise InputError("field values must be a flat array, one per sample")
        if not np.all(np.isfinite(self.values)):
            raise InputError(f"field '{self.tag}' has non-finite values")

    @property
    def has_closed_form(self) -> bool:
        return self.closed_form is not None

    def __call__(self, points) -> np.ndarray:
        if self.closed_form is None:
            raise InputError(f"field '{self.tag}' has no closed form")
        return np.asarray(self.closed_form(np.asarray(points, dtype=float)), dtype=float)

    def __len__(self):
        return len(self.values)

    def _combine(self, other, op, symbol):
        if isinstance(other, ScalarField):
            if len(other) != len(self):
                raise InputError("fields live on different sample sets")
            closed = None
            if self.closed_form is not None and other.closed_form is not None:
                a, b = self.closed_form, other.closed_form
                closed = lambda x: op(a(x), b(x))
            return ScalarField(op(self.values, other.values), closed, f"({self.tag}{symbol}{other.tag})")
        c = float(other)
        closed = None
        if self.closed_form is not None:
            a = self.closed_form
            closed = lambda x: op(a(x), c)
        return ScalarField(op(self.values, c), closed, f"({self.tag}{symbol}{c:g})")

    def __add__(self, other):
        return self._combine(other, np.add, "+")

    def __sub__(self, other):
        return self._combine(other, np.subtract, "-")

    def __mul__(self, scalar):
        if isinstance(scalar, ScalarField):
            raise InputError("fields multiply by scalars only")
        return self._combine(scalar, np.multiply, "*")

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def is_zero(self) -> bool:
        return not np.any(self.values)


def field_from_values(values, tag: str = "sampled") -> ScalarField:
    return ScalarField(np.asarray(values, dtype=float), None, tag)


def _closed_form(manifold, spec: dict):
    """Callable for a function spec, or None when only sampled values exist."""
    kind = spec.get("kind")
    dim = manifold.ambient_dim
    if kind == "zero":
        return lambda x: np.zeros(np.shape(x)[:-1])
    if kind == "constant":
        value = float(spec.get("value", 1.0))
        return lambda x: np.full(np.shape(x)[:-1], value)
    if kind in ("linear", "coordinate"):
        if manifold.periodic:
            raise InputError(f"'{kind}' functions are not continuous on the periodic {manifold.kind} manifold")
        if kind == "linear":
            covector = np.asarray(spec.get("covector"), dtype=float)
        else:
            axis = int(spec.get("axis", 0))
            if not 0 <= axis < dim:
                raise InputError(f"coordinate axis {axis} out of range")
            covector = np.eye(dim)[axis]
        if covector.shape != (dim,):
            raise InputError(f"linear function covector must have length {dim}")
        offset = float(spec.get("offset", 0.0))
        return lambda x: np.asarray(x) @ covector + offset
    if kind == "cone":
        center = np.asarray(spec.get("center"), dtype=float)
        height = float(spec.get("height", 1.0))
        if center.shape != (dim,) or height < 0:
            raise InputError("cone needs an ambient center and a non-negative height")
        return lambda x: np.maximum(0.0, height - np.linalg.norm(manifold.displacement(center, x), axis=-1))
    if kind in ("distance", "truncated_distance"):
        center = np.asarray(spec.get("center"), dtype=float)
        if center.shape != (dim,):
            raise InputError(f"{kind} needs an ambient center")
        if not manifold.has_closed_form_log:
            return None
        if kind == "distance":
            return lambda x: manifold.distance(center, x)
        radius = float(spec.get("radius", 1.0))
        return lambda x: np.maximum(0.0, radius - manifold.distance(center, x))
    if kind == "fourier":
        mode = np.asarray(spec.get("mode", np.eye(dim)[0]), dtype=float)
        amplitude = float(spec.get("amplitude", 1.0))
        periods = getattr(manifold, "periods", np.ones(dim))
        return lambda x: amplitude * np.sin(2.0 * np.pi * (np.asarray(x) / periods) @ mode)
    raise InputError(f"unknown function kind '{kind}'; expected one of {FUNCTION_KINDS}")


def make_field(sampled, spec: dict, tag: str | None = None) -> ScalarField:
    """
    Evaluate a function spec on a sampled manifold.

    Distance fields on kinds without a closed-form logarithm fall back to
    graph distances from the sample nearest to the center, without a closed form.
    """
    manifold = sampled.manifold
    tag = tag or spec.get("kind")
    closed = _closed_form(manifold, spec)
    if closed is not None:
        return ScalarField(closed(sampled.points), closed, tag)
    center = np.asarray(spec["center"], dtype=float)
    source = int(np.argmin(np.linalg.norm(manifold.displacement(center, sampled.points), axis=1)))
    dist = dijkstra(sampled.graph, directed=False, indices=source)
    if spec["kind"] == "truncated_distance":
        dist = np.maximum(0.0, float(spec.get("radius", 1.0)) - dist)
    logger.info("field '%s' sampled from graph distances on %s", tag, manifold.kind)
    return ScalarField(dist, None, tag)


def get_function(sampled, name: str) -> ScalarField:
    return make_field(sampled, registry_entry("functions", name), tag=name)


def function_names() -> list:
    return sorted(load_registry("functions").get("entries", {}))
