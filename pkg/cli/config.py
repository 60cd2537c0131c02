"""
Run configuration documents.

One JSON document per run. Names resolve against the registries in DATA_DIR;
every failure is a ConfigError naming the offending key.
"""
import os
import json
import copy
import logging
from dataclasses import dataclass, field, replace

from core.errors import ConfigError
from core.settings import DEFAULT_OUTPUT_DIR, load_registry, registry_entry
from manifold.registry import manifold_from_dict
from metricgraph.fields import get_function, make_field
from metricgraph.sampling import DEFAULT_K, sample_manifold
from minkowski.norms import MinkowskiNorm
from minkowski.registry import get_norm

logger = logging.getLogger(__name__)

COMMANDS = ("validate-norm", "smooth", "check-hilbert", "quotient", "distances")
CONFIG_KEYS = ("command", "manifold", "norm", "measure", "function", "functions", "params", "output_dir",
               "instances", "description")

DEFAULT_N = 400
DEFAULT_SEED = 0
# parameters that must be strictly positive when present
POSITIVE_PARAMS = ("delta", "epsilon", "lambda", "tol_h", "tol_nh")
INTEGER_PARAMS = {"n": 2, "k": 1, "rungs": 1, "samples": 1, "pairs": 1, "refinement_levels": 2}


@dataclass(frozen=True)
class RunConfig:
    command: str
    manifold: str | dict | None = None
    norm: str | dict | None = None
    measure: dict = field(default_factory=lambda: {"density": "uniform"})
    functions: tuple = ()
    params: dict = field(default_factory=dict)
    output_dir: str = DEFAULT_OUTPUT_DIR
    instances: object = None
    base_dir: str = "."

    @property
    def seed(self) -> int:
        return int(self.params.get("seed", DEFAULT_SEED))

    def param(self, key: str, default=None):
        return self.params.get(key, default)

    def to_dict(self) -> dict:
        doc = {"command": self.command, "params": self.params, "output_dir": self.output_dir}
        if self.manifold is not None:
            doc["manifold"] = self.manifold
        if self.norm is not None:
            doc["norm"] = self.norm
        if self.command in ("smooth", "check-hilbert", "distances"):
            doc["measure"] = self.measure
        if self.functions:
            doc["functions"] = list(self.functions)
        return doc


def _check_params(params: dict) -> dict:
    if not isinstance(params, dict):
        raise ConfigError("params must be a mapping", key="params")
    params = dict(params)
    for key in POSITIVE_PARAMS:
        if key in params:
            try:
                value = float(params[key])
            except (TypeError, ValueError):
                raise ConfigError(f"params.{key} must be a number", key=f"params.{key}") from None
            if not value > 0:
                raise ConfigError(f"params.{key} must be positive, got {params[key]}", key=f"params.{key}")
    for key, minimum in INTEGER_PARAMS.items():
        if key in params:
            value = params[key]
            if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
                raise ConfigError(f"params.{key} must be an integer >= {minimum}, got {value!r}",
                                  key=f"params.{key}")
    if "seed" in params and (isinstance(params["seed"], bool) or not isinstance(params["seed"], int)):
        raise ConfigError(f"params.seed must be an integer, got {params['seed']!r}", key="params.seed")
    return params


def _check_name(registry: str, name, key: str):
    if isinstance(name, dict):
        return
    if not isinstance(name, str):
        raise ConfigError(f"{key} must be a registry name", key=key)
    if name not in load_registry(registry).get("entries", {}):
        raise ConfigError(f"{key} '{name}' not found in {registry} registry", key=name)


def config_from_dict(doc: dict, command: str | None = None, base_dir: str = ".") -> RunConfig:
    """
    Validate a run document.

    Args:
        doc: Parsed run document
        command: Command given on the command line; must agree with doc["command"] when both exist
        base_dir: Directory relative paths in the document resolve against

    Returns:
        RunConfig
    """
    if not isinstance(doc, dict):
        raise ConfigError("run config must be a JSON object", key="config")
    unknown = sorted(set(doc) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key '{unknown[0]}'", key=unknown[0])
    name = doc.get("command", command)
    if command is not None and name != command:
        raise ConfigError(f"config is for '{name}', not '{command}'", key="command")
    if name not in COMMANDS:
        raise ConfigError(f"unknown command '{name}'; expected one of {', '.join(COMMANDS)}", key="command")

    functions = doc.get("functions", [doc["function"]] if "function" in doc else [])
    if not isinstance(functions, list):
        raise ConfigError("functions must be a list", key="functions")
    for f in functions:
        _check_name("functions", f, "function")
    if doc.get("manifold") is not None:
        _check_name("manifolds", doc["manifold"], "manifold")
    if doc.get("norm") is not None:
        _check_name("norms", doc["norm"], "norm")
    measure = doc.get("measure", {"density": "uniform"})
    if not isinstance(measure, dict):
        raise ConfigError("measure must be a mapping", key="measure")

    required = {
        "validate-norm": ("norm",),
        "smooth": ("manifold",),
        "check-hilbert": ("manifold",),
        "distances": ("manifold",),
        "quotient": (),
    }[name]
    for key in required:
        if doc.get(key) is None:
            raise ConfigError(f"'{name}' needs a '{key}' entry", key=key)
    if name == "smooth" and len(functions) != 1:
        raise ConfigError("'smooth' needs exactly one function", key="function")
    if name == "check-hilbert" and len(functions) != 2:
        raise ConfigError("'check-hilbert' needs two functions", key="functions")

    return RunConfig(
        command=name,
        manifold=doc.get("manifold"),
        norm=doc.get("norm"),
        measure=copy.deepcopy(measure),
        functions=tuple(functions),
        params=_check_params(doc.get("params", {})),
        output_dir=str(doc.get("output_dir", DEFAULT_OUTPUT_DIR)),
        instances=doc.get("instances"),
        base_dir=base_dir,
    )


def load_config(path: str, command: str | None = None, out: str | None = None, seed: int | None = None) -> RunConfig:
    """Read a run document; --out and --seed override the document."""
    try:
        with open(path) as f:
            doc = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file '{path}' not found", key="config") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file '{path}' is not valid JSON: {e}", key="config") from None
    config = config_from_dict(doc, command, base_dir=os.path.dirname(os.path.abspath(path)))
    if out is not None:
        config = replace(config, output_dir=out)
    if seed is not None:
        config = replace(config, params={**config.params, "seed": int(seed)})
    logger.info("loaded %s config from %s", config.command, path)
    return config


def resolve_manifold(config: RunConfig):
    """Manifold of a config; a config norm replaces the norm of a euclidean manifold."""
    ref = config.manifold
    doc = copy.deepcopy(ref) if isinstance(ref, dict) else copy.deepcopy(registry_entry("manifolds", ref))
    if config.norm is not None and doc.get("kind") == "euclidean":
        doc["norm"] = config.norm
    return manifold_from_dict(doc)


def resolve_norm(config: RunConfig):
    if isinstance(config.norm, dict):
        return MinkowskiNorm.from_dict(config.norm)
    return get_norm(config.norm) if config.norm is not None else None


def resolve_sampled(config: RunConfig):
    """Sampled manifold for n, k, measure and seed of the config."""
    manifold = resolve_manifold(config)
    return sample_manifold(manifold, int(config.param("n", DEFAULT_N)), config.measure, seed=config.seed,
                           k=int(config.param("k", DEFAULT_K)))


def resolve_function(sampled, ref):
    if isinstance(ref, dict):
        return make_field(sampled, ref)
    return get_function(sampled, ref)
