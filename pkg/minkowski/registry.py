"""Named norms from data/norms.json."""
from core.settings import load_registry, registry_entry
from minkowski.norms import MinkowskiNorm


def get_norm(name: str) -> MinkowskiNorm:
    return MinkowskiNorm.from_dict(registry_entry("norms", name))


def norm_names() -> list:
    return sorted(load_registry("norms").get("entries", {}))
