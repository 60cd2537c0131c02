"""
Axiom checks for Minkowski norms.

validate_minkowski samples vectors and checks positive definiteness,
homogeneity, the triangle inequality, reversibility and positive
definiteness of the finite-difference Hessian of F^2. Violations are
collected, never raised.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from minkowski.duality import unit_directions
from minkowski.norms import MinkowskiNorm, euclidean

logger = logging.getLogger(__name__)

HESSIAN_STEP = 1e-4
HESSIAN_RELATIVE_TOL = 1e-6
HOMOGENEITY_TOL = 1e-9
TRIANGLE_TOL = 1e-9
POSITIVITY_TOL = 1e-12
MAX_VIOLATIONS_PER_AXIOM = 50

AXIOMS = ("positive_definite", "triangle", "homogeneity", "reversibility", "strong_convexity")


@dataclass
class Violation:
    vector: list
    axiom: str
    residual: float

    def to_dict(self) -> dict:
        return {"vector": self.vector, "axiom": self.axiom, "residual": self.residual}


@dataclass
class ConvexityReport:
    min_hessian_eigenvalue: float
    violations: list = field(default_factory=list)
    passed: bool = False
    violation_counts: dict = field(default_factory=dict)
    sample_count: int = 0
    seed: int = 0
    norm: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "norm": self.norm,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "passed": self.passed,
            "min_hessian_eigenvalue": self.min_hessian_eigenvalue,
            "violation_counts": self.violation_counts,
            "violations": [v.to_dict() for v in self.violations],
        }


def sample_vectors(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random nonzero vectors with log-uniform magnitudes in [0.1, 10]."""
    g = rng.standard_normal((count, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * np.exp(rng.uniform(np.log(0.1), np.log(10.0), size=(count, 1)))


def hessian_sq(norm: MinkowskiNorm, vs: np.ndarray) -> np.ndarray:
    """
    Central-difference Hessian of F^2 at each row of vs, with one Richardson step.

    Step h = HESSIAN_STEP * max(1, |v|); returns shape (m, dim, dim).
    """
    m, d = vs.shape
    h0 = HESSIAN_STEP * np.maximum(1.0, np.linalg.norm(vs, axis=1))
    eye = np.eye(d)

    def level(h):
        hess = np.empty((m, d, d))
        for i in range(d):
            for j in range(i, d):
                ei = h[:, None] * eye[i]
                ej = h[:, None] * eye[j]
                f = lambda x: norm.evaluate(x) ** 2
                val = (f(vs + ei + ej) - f(vs + ei - ej) - f(vs - ei + ej) + f(vs - ei - ej)) / (4.0 * h * h)
                hess[:, i, j] = val
                hess[:, j, i] = val
        return hess

    return (4.0 * level(0.5 * h0) - level(h0)) / 3.0


def validate_minkowski(norm: MinkowskiNorm, sample_count: int = 1000, seed: int = 0) -> ConvexityReport:
    """
    Check the Minkowski axioms on seeded samples.

    Args:
        norm: Norm under test
        sample_count: Number of random sample vectors (>= 1)
        seed: Seed for the sample generator

    Returns:
        ConvexityReport; passed iff no violations and min Hessian eigenvalue > 0
    """
    rng = np.random.default_rng(seed)
    d = norm.dim
    samples = sample_vectors(d, max(1, sample_count), rng)
    probes = np.vstack([np.eye(d), -np.eye(d)])
    found = {axiom: [] for axiom in AXIOMS}
    counts = {axiom: 0 for axiom in AXIOMS}

    def record(axiom, vectors, residuals):
        counts[axiom] += len(vectors)
        room = MAX_VIOLATIONS_PER_AXIOM - len(found[axiom])
        for vec, res in list(zip(vectors, residuals))[:max(room, 0)]:
            found[axiom].append(Violation([float(x) for x in vec], axiom, float(res)))

    # i) positive definiteness, including the coordinate axes
    if float(norm.evaluate(np.zeros(d))) != 0.0:
        record("positive_definite", [np.zeros(d)], [float(norm.evaluate(np.zeros(d)))])
    pd_set = np.vstack([probes, samples])
    values = norm.evaluate(pd_set)
    bad = values <= POSITIVITY_TOL * np.linalg.norm(pd_set, axis=1)
    record("positive_definite", pd_set[bad], values[bad])

    # iii) positive homogeneity
    lam = rng.uniform(0.0, 10.0, size=len(samples))
    lhs = norm.evaluate(lam[:, None] * samples)
    rhs = lam * norm.evaluate(samples)
    rel = np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300)
    rel[rhs == 0] = np.abs(lhs[rhs == 0])
    bad = rel > HOMOGENEITY_TOL
    record("homogeneity", samples[bad], rel[bad])

    # ii) triangle inequality on shifted pairs
    partners = np.roll(samples, 1, axis=0) * rng.choice([-1.0, 1.0], size=(len(samples), 1))
    f_v, f_w = norm.evaluate(samples), norm.evaluate(partners)
    excess = norm.evaluate(samples + partners) - f_v - f_w
    bad = excess > TRIANGLE_TOL * np.maximum(1.0, f_v + f_w)
    record("triangle", samples[bad], excess[bad])

    # reversibility
    if norm.reversible:
        diff = np.abs(norm.evaluate(-samples) - f_v)
        bad = diff > HOMOGENEITY_TOL * np.maximum(f_v, 1e-300)
        record("reversibility", samples[bad], diff[bad])

    # v) strong convexity via the Hessian of F^2
    eig = np.linalg.eigvalsh(hessian_sq(norm, samples))
    eig_min, eig_max = eig[:, 0], eig[:, -1]
    min_eig = float(np.min(eig_min))
    bad = eig_min <= HESSIAN_RELATIVE_TOL * np.maximum(1.0, np.abs(eig_max))
    record("strong_convexity", samples[bad], eig_min[bad])

    violations = [v for axiom in AXIOMS for v in found[axiom]]
    passed = not violations and min_eig > 0
    logger.info("validated %s norm: passed=%s, min eigenvalue %.6g, violations %s",
                norm.family, passed, min_eig, {k: c for k, c in counts.items() if c})
    return ConvexityReport(
        min_hessian_eigenvalue=min_eig,
        violations=violations,
        passed=passed,
        violation_counts=counts,
        sample_count=sample_count,
        seed=seed,
        norm=norm.to_dict(),
    )


def parallelogram_defect(norm: MinkowskiNorm, v, w) -> float:
    """F(v+w)^2 + F(v-w)^2 - 2F(v)^2 - 2F(w)^2."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    stack = np.stack([v + w, v - w, v, w])
    f = norm.evaluate(stack) ** 2
    return float(f[0] + f[1] - 2.0 * f[2] - 2.0 * f[3])


def recover_gram(norm: MinkowskiNorm) -> np.ndarray:
    """Polarization: G_ij = (F(e_i+e_j)^2 - F(e_i-e_j)^2) / 4."""
    eye = np.eye(norm.dim)
    gram = np.empty((norm.dim, norm.dim))
    for i in range(norm.dim):
        for j in range(norm.dim):
            gram[i, j] = 0.25 * (norm.evaluate(eye[i] + eye[j]) ** 2 - norm.evaluate(eye[i] - eye[j]) ** 2)
    return gram


def is_inner_product(norm: MinkowskiNorm, sample_count: int = 200, seed: int = 0, tol: float = 1e-9) -> bool:
    """True when the parallelogram defect vanishes on sampled pairs (relative to their size)."""
    rng = np.random.default_rng(seed)
    vs = sample_vectors(norm.dim, sample_count, rng)
    ws = sample_vectors(norm.dim, sample_count, rng)
    f = norm.evaluate(np.stack([vs + ws, vs - ws, vs, ws])) ** 2
    defect = np.abs(f[0] + f[1] - 2.0 * f[2] - 2.0 * f[3])
    return bool(np.all(defect <= tol * (2.0 * f[2] + 2.0 * f[3])))


def equivalence_constant(norm: MinkowskiNorm, count: int = 4096, seed: int = 0) -> float:
    """Smallest C >= 1 with (1/C)F(v) <= |v| <= C F(v) on sampled unit directions."""
    dirs = unit_directions(norm.dim, count=count, seed=seed)
    if norm.dim > 1:
        dirs = np.vstack([dirs, np.eye(norm.dim), -np.eye(norm.dim)])
    f = norm.evaluate(dirs)
    if np.any(f <= 0):
        return float("inf")
    return float(max(1.0, np.max(f), np.max(1.0 / f)))


def inner_product_norm(norm: MinkowskiNorm) -> MinkowskiNorm:
    """Euclidean norm with the Gram matrix recovered by polarization."""
    return euclidean(norm.dim, recover_gram(norm))
