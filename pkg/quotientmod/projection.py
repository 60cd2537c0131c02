"""
The projection P onto V*/K and the embedding of K-perp into V.

P sends a covector to its class w + K with the quotient norm
min over the coset of F*; iota includes K-perp into V, and its abstract
norm is the norm of v as a functional on (V*/K, quotient norm).
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from core.errors import InputError, PreconditionError
from quotientmod.solvers import LiftResult, minimal_lift_solve, quotient_support

logger = logging.getLogger(__name__)

ANNIHILATOR_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuotientElement:
    representative: np.ndarray
    class_norm: float
    gap: float
    method: str
    solve: LiftResult = field(repr=False, compare=False)
    instance_id: str = ""

    def to_dict(self) -> dict:
        return {"representative": self.representative.tolist(), "class_norm": self.class_norm, "gap": self.gap,
                "method": self.method, "lift": self.solve.lift.tolist()}


@dataclass(frozen=True, eq=False)
class VectorResult:
    embedded: np.ndarray
    abstract_norm: float
    concrete_norm: float

    @property
    def defect(self) -> float:
        return abs(self.abstract_norm - self.concrete_norm)


def _covector(inst, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (inst.n,):
        raise InputError(f"covector of shape {w.shape} does not match dimension {inst.n}")
    return w


def project_P(inst, w, method: str = "auto") -> QuotientElement:
    """
    Class of w in V*/K with its quotient norm.

    Args:
        inst: QuotientInstance
        w: Covector of length n
        method: Lift solver ("auto" picks by the shape of F*)

    Returns:
        QuotientElement with class_norm <= F*(w)

    Raises:
        NumericError: the solver did not converge (diagnostics carry the gap)
    """
    w = _covector(inst, w)
    result = minimal_lift_solve(inst, w, method)
    logger.debug("instance %s: class norm %.12g by %s, gap %.3g", inst.id, result.value, result.method, result.gap)
    return QuotientElement(w.copy(), result.value, result.gap, result.method, result, inst.id)


def minimal_lift(inst, element: QuotientElement) -> np.ndarray:
    """The lift in the class with F*(lift) = class_norm."""
    if element.instance_id != inst.id:
        raise PreconditionError(f"class was projected on instance '{element.instance_id}', not '{inst.id}'",
                                witness=element.instance_id)
    return element.solve.lift.copy()


def abstract_norm(inst, v) -> float:
    """
    sup{<w, v> : class_norm(w + K) <= 1} for v in K-perp.

    The pairing is constant on classes; the supremum is taken over quotient
    coordinates with class norms from the lift solver.
    """
    return quotient_support(inst, v).value


def iota_embed(inst, v) -> VectorResult:
    """
    Embed v in K-perp into V with its abstract and concrete norms.

    Raises:
        PreconditionError: some basis covector of K does not annihilate v
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (inst.n,):
        raise InputError(f"vector of shape {v.shape} does not match dimension {inst.n}")
    residual = inst.annihilator_residual(v)
    if residual > ANNIHILATOR_TOL:
        raise PreconditionError(f"vector is not in the annihilator of K (max |<k, v>| = {residual:.3g})",
                                witness=(inst.basis @ v).tolist())
    if inst.k == inst.n:
        return VectorResult(np.zeros(inst.n), 0.0, 0.0)
    return VectorResult(v.copy(), abstract_norm(inst, v), float(inst.norm.evaluate(v)) if np.any(v) else 0.0)
