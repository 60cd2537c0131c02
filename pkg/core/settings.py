"""
Shared settings for finslerkit.
Paths and defaults come from the environment (optionally a .env file);
nothing is required to be set.
"""
import os
import json

from dotenv import load_dotenv

from core.errors import ConfigError

load_dotenv()

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_DIR = os.getenv("FINSLERKIT_DATA_DIR", os.path.join(ROOT_DIR, "data"))
DEFAULT_OUTPUT_DIR = os.getenv("FINSLERKIT_OUTPUT_DIR", "out")
LOG_LEVEL = os.getenv("FINSLERKIT_LOG_LEVEL", "WARNING")

REGISTRY_FILES = {
    "norms": "norms.json",
    "manifolds": "manifolds.json",
    "functions": "functions.json",
}

_registry_cache: dict = {}


def load_registry(name: str) -> dict:
    """Load a named JSON registry (norms, manifolds, functions) from DATA_DIR."""
    if name not in REGISTRY_FILES:
        raise ConfigError(f"unknown registry '{name}'", key=name)
    if name not in _registry_cache:
        path = os.path.join(DATA_DIR, REGISTRY_FILES[name])
        with open(path) as f:
            _registry_cache[name] = json.load(f)
    return _registry_cache[name]


def registry_entry(name: str, key: str) -> dict:
    """Look up one entry of a registry, raising ConfigError naming the key."""
    entries = load_registry(name).get("entries", {})
    if key not in entries:
        raise ConfigError(f"'{key}' not found in {name} registry", key=key)
    return entries[key]
