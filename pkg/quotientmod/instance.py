"""
Finite-dimensional quotient instances.

A normed space V = R^n with norm F, a subspace K of V* spanned by the rows
of a basis matrix, a representative covector and a vector of V used for the
embedding. V and V* are paired by the coordinate dot product, so the
annihilator of K is the null space of the basis matrix.
"""
import math
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from core.errors import InputError
from minkowski.norms import MinkowskiNorm, euclidean, quartic_blend, weighted_lp
from minkowski.registry import get_norm
from minkowski.validation import validate_minkowski
from quotientmod.dual import DualFunctional

logger = logging.getLogger(__name__)

MAX_DIM = 6
MAX_SUBSPACE = 3
INSTANCE_FAMILIES = ("euclidean", "l1", "linf", "quartic_blend")
NORM_AXIOMS = ("positive_definite", "triangle", "homogeneity")
VALIDATION_SAMPLES = 256
RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuotientInstance:
    id: str
    norm: MinkowskiNorm
    basis: np.ndarray
    representative: np.ndarray
    vector: np.ndarray = None
    norm_name: str | None = None

    @property
    def n(self) -> int:
        return self.norm.dim

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def dual(self) -> DualFunctional:
        return DualFunctional(self.norm)

    @cached_property
    def subspace(self) -> np.ndarray:
        """Orthonormal basis of K, shape (n, k)."""
        if self.k == 0:
            return np.zeros((self.n, 0))
        q, _ = np.linalg.qr(self.basis.T)
        return q

    @cached_property
    def annihilator(self) -> np.ndarray:
        """Orthonormal basis of K-perp in V, shape (n, n - k)."""
        full, _ = np.linalg.qr(np.hstack([self.subspace, np.eye(self.n)]))
        return full[:, self.k:self.n]

    def project_annihilator(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        q = self.subspace
        return v - q @ (q.T @ v)

    def annihilator_residual(self, v) -> float:
        """max_k |<k, v>| over the basis covectors."""
        if self.k == 0:
            return 0.0
        return float(np.max(np.abs(self.basis @ np.asarray(v, dtype=float))))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "norm": self.norm_name or self.norm.to_dict(),
            "basis": self.basis.tolist(),
            "representative": self.representative.tolist(),
            "vector": self.vector.tolist(),
        }


def _check_norm(norm: MinkowskiNorm, seed: int = 0):
    report = validate_minkowski(norm, sample_count=VALIDATION_SAMPLES, seed=seed)
    broken = sorted({v.axiom for v in report.violations if v.axiom in NORM_AXIOMS})
    if broken:
        raise InputError(f"{norm.family} norm violates {', '.join(broken)}")


def make_instance(id: str, norm: MinkowskiNorm, basis, representative, vector=None,
                  norm_name: str | None = None, validate: bool = True) -> QuotientInstance:
    """
    Build and check a quotient instance.

    Args:
        id: Instance identifier (first CSV column)
        norm: Norm F on V
        basis: k x n matrix whose rows span K (k may be 0 or n)
        representative: Covector whose class is projected
        vector: Vector of V to embed; the projection of the representative
            onto K-perp when omitted
        validate: Check the norm axioms on seeded samples

    Raises:
        InputError: shape mismatch, dependent basis, or a norm failing an axiom
    """
    n = norm.dim
    basis = np.asarray(basis, dtype=float)
    if basis.size == 0:
        basis = np.zeros((0, n))
    representative = np.asarray(representative, dtype=float)
    if basis.ndim != 2 or basis.shape[1] != n:
        raise InputError(f"basis must be a k x {n} matrix, got shape {basis.shape}")
    if representative.shape != (n,):
        raise InputError(f"representative of shape {representative.shape} does not match dimension {n}")
    if basis.shape[0] > n:
        raise InputError(f"K has {basis.shape[0]} basis covectors in dimension {n}")
    if not np.all(np.isfinite(basis)) or not np.all(np.isfinite(representative)):
        raise InputError("instance data must be finite")
    if basis.shape[0] and np.linalg.matrix_rank(basis, tol=RANK_TOL) < basis.shape[0]:
        raise InputError("basis covectors of K are linearly dependent")
    if validate:
        _check_norm(norm)
    instance = QuotientInstance(id, norm, basis, representative, None, norm_name)
    if vector is None:
        vector = instance.project_annihilator(representative)
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (n,):
        raise InputError(f"vector of shape {vector.shape} does not match dimension {n}")
    object.__setattr__(instance, "vector", vector)
    return instance


def instance_from_dict(doc: dict, index: int = 0) -> QuotientInstance:
    """Instance document: {id, norm (name or norm document), basis, representative, vector?}."""
    if not isinstance(doc, dict):
        raise InputError(f"instance {index} is not a mapping")
    try:
        norm_doc = doc["norm"]
        representative = doc["representative"]
    except KeyError as e:
        raise InputError(f"instance {index} missing key {e.args[0]!r}") from e
    norm_name = norm_doc if isinstance(norm_doc, str) else None
    try:
        norm = get_norm(norm_doc) if norm_name else MinkowskiNorm.from_dict(norm_doc)
        return make_instance(str(doc.get("id", f"q{index:04d}")), norm, doc.get("basis", []), representative,
                             doc.get("vector"), norm_name)
    except (TypeError, ValueError) as e:
        if isinstance(e, InputError):
            raise
        raise InputError(f"instance {index} is malformed: {e}") from e


def _random_norm(family: str, n: int, rng: np.random.Generator) -> MinkowskiNorm:
    if family == "euclidean":
        a = rng.standard_normal((n, n))
        return euclidean(n, a @ a.T / n + 0.5 * np.eye(n))
    if family == "l1":
        return weighted_lp(n, 1.0, rng.uniform(0.5, 2.0, n))
    if family == "linf":
        return weighted_lp(n, "inf", rng.uniform(0.5, 2.0, n))
    if family == "quartic_blend":
        return quartic_blend(n, float(rng.uniform(0.0, 0.9)))
    raise InputError(f"unknown instance family '{family}'")


def random_instance(seed: int, n: int | None = None, k: int | None = None,
                    family: str | None = None) -> QuotientInstance:
    """
    Seeded random instance with n <= MAX_DIM and dim K <= MAX_SUBSPACE, k < n.

    The embedded vector is a random vector projected onto K-perp.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, MAX_DIM + 1)) if n is None else int(n)
    if n < 1:
        raise InputError(f"dimension must be positive, got {n}")
    k = int(rng.integers(0, min(MAX_SUBSPACE, n - 1) + 1)) if k is None else int(k)
    if not 0 <= k <= n:
        raise InputError(f"subspace dimension {k} out of range for n = {n}")
    family = family or INSTANCE_FAMILIES[int(rng.integers(len(INSTANCE_FAMILIES)))]
    norm = _random_norm(family, n, rng)
    basis = rng.standard_normal((k, n))
    representative = rng.standard_normal(n)
    instance = make_instance(f"q{seed:04d}", norm, basis, representative, np.zeros(n), validate=False)
    vector = instance.project_annihilator(rng.standard_normal(n))
    object.__setattr__(instance, "vector", vector)
    logger.debug("instance %s: %s, n=%d, k=%d", instance.id, family, n, k)
    return instance


def random_instances(count: int, seed: int = 0) -> list:
    if count < 0 or not math.isfinite(count):
        raise InputError(f"instance count must be non-negative, got {count}")
    return [random_instance(seed + i) for i in range(int(count))]
