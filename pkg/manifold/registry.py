"""Manifold documents and named manifolds from data/manifolds.json."""
from core.errors import ConfigError
from core.settings import load_registry, registry_entry
from manifold.specs import EuclideanSpace, FinslerPlane, FlatTorus2, Manifold, Sphere2
from minkowski.norms import MinkowskiNorm
from minkowski.registry import get_norm

KINDS = ("euclidean", "sphere2", "flat_torus2", "finsler_plane")


def manifold_from_dict(doc: dict) -> Manifold:
    """
    Build a manifold from its document.

    Args:
        doc: {"kind": ..., kind-specific fields}; euclidean norms may be
            given by registry name or as a norm document

    Returns:
        Manifold instance
    """
    kind = doc.get("kind")
    if kind == "euclidean":
        norm_ref = doc.get("norm", "euclidean2")
        if isinstance(norm_ref, str):
            norm, name = get_norm(norm_ref), norm_ref
        else:
            norm, name = MinkowskiNorm.from_dict(norm_ref), None
        if "dim" in doc and int(doc["dim"]) != norm.dim:
            raise ConfigError(f"euclidean dim {doc['dim']} does not match norm dimension {norm.dim}", key="dim")
        return EuclideanSpace(norm, domain=doc.get("domain"), norm_name=name)
    if kind == "sphere2":
        return Sphere2(float(doc.get("radius", 1.0)))
    if kind == "flat_torus2":
        return FlatTorus2(doc.get("periods", (1.0, 1.0)), doc.get("metric_field"))
    if kind == "finsler_plane":
        return FinslerPlane(doc.get("field"), domain=doc.get("domain"))
    raise ConfigError(f"unknown manifold kind '{kind}'", key="kind")


def get_manifold(name: str) -> Manifold:
    return manifold_from_dict(registry_entry("manifolds", name))


def manifold_names() -> list:
    return sorted(load_registry("manifolds").get("entries", {}))
