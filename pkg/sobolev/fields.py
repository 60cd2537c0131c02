"""
Covector and vector fields on sampled manifolds.

Components are taken in the normal chart of each sample, against the frame
I_x of the manifold, so the pointwise norms are F(x, I_x v) and its dual.
"""
import logging
from dataclasses import dataclass

import numpy as np

from core.errors import InputError
from minkowski.duality import closed_form_dual, dual_norm

logger = logging.getLogger(__name__)

CAUCHY_SCHWARZ_TOL = 1e-9


def sample_norms(sampled) -> list:
    """Frame norm at every sample; homogeneous kinds share one object."""
    manifold = sampled.manifold
    if manifold.homogeneous:
        return [manifold.frame_norm(sampled.points[0])] * sampled.n
    return [manifold.frame_norm(x) for x in sampled.points]


def dual_norms(sampled, covectors: np.ndarray, norms: list | None = None) -> np.ndarray:
    norms = norms or sample_norms(sampled)
    if sampled.manifold.homogeneous:
        dual = closed_form_dual(norms[0])
        if dual is not None:
            return dual.evaluate(covectors)
    return np.array([dual_norm(norm, w) for norm, w in zip(norms, covectors)])


def _check_components(sampled, components: np.ndarray, what: str) -> np.ndarray:
    components = np.asarray(components, dtype=float)
    expected = (sampled.n, sampled.manifold.intrinsic_dim)
    if components.shape != expected:
        raise InputError(f"{what} components have shape {components.shape}, expected {expected}")
    return components


@dataclass(eq=False)
class CovectorField:
    sampled: object
    covectors: np.ndarray
    norms: np.ndarray

    def recompute_norms(self) -> np.ndarray:
        return dual_norms(self.sampled, self.covectors)

    def l2_norm(self) -> float:
        return self.sampled.measure.l2_norm(self.norms)


@dataclass(eq=False)
class VectorField:
    sampled: object
    vectors: np.ndarray
    norms: np.ndarray

    def recompute_norms(self) -> np.ndarray:
        norms = sample_norms(self.sampled)
        if self.sampled.manifold.homogeneous:
            return norms[0].evaluate(self.vectors)
        return np.array([float(norm.evaluate(v)) for norm, v in zip(norms, self.vectors)])

    def l2_norm(self) -> float:
        return self.sampled.measure.l2_norm(self.norms)

    def __add__(self, other):
        return vector_field(self.sampled, self.vectors + other.vectors)

    def __sub__(self, other):
        return vector_field(self.sampled, self.vectors - other.vectors)


def covector_field(sampled, covectors) -> CovectorField:
    covectors = _check_components(sampled, covectors, "covector")
    return CovectorField(sampled, covectors, dual_norms(sampled, covectors))


def vector_field(sampled, vectors) -> VectorField:
    vectors = _check_components(sampled, vectors, "vector")
    field = VectorField(sampled, vectors, np.zeros(sampled.n))
    field.norms = field.recompute_norms()
    return field


def pairing(omega: CovectorField, v: VectorField) -> np.ndarray:
    """omega(v) at every sample."""
    if omega.sampled is not v.sampled:
        raise InputError("fields live on different sample sets")
    return np.einsum("ij,ij->i", omega.covectors, v.vectors)


def l2_norm(field) -> float:
    """L2(mu) norm of the pointwise norms of a covector or vector field."""
    return field.l2_norm()


def cauchy_schwarz_audit(omega: CovectorField, v: VectorField, tol: float = CAUCHY_SCHWARZ_TOL) -> dict:
    """|omega(v)| <= |omega| |v| at every sample, up to a relative tolerance."""
    lhs = np.abs(pairing(omega, v))
    rhs = omega.norms * v.norms
    excess = lhs - rhs * (1.0 + tol) - tol
    violations = np.flatnonzero(excess > 0)
    return {
        "max_ratio": float(np.max(np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), 0.0), initial=0.0)),
        "violations": violations.tolist(),
        "ok": len(violations) == 0,
    }


def module_parallelogram_defect(v: VectorField, w: VectorField) -> dict:
    """
    Parallelogram defect of the tangent module at every sample.

    D(x) = |v+w|^2 + |v-w|^2 - 2|v|^2 - 2|w|^2; zero on inner-product norm fields.
    """
    if v.sampled is not w.sampled:
        raise InputError("fields live on different sample sets")
    measure = v.sampled.measure
    vs, vd = v + w, v - w
    defect = vs.norms ** 2 + vd.norms ** 2 - 2.0 * v.norms ** 2 - 2.0 * w.norms ** 2
    scale = measure.integrate(2.0 * v.norms ** 2 + 2.0 * w.norms ** 2)
    absolute = measure.integrate(np.abs(defect))
    return {
        "defect": defect,
        "integrated_abs": absolute,
        "relative": absolute / scale if scale > 0 else 0.0,
    }
