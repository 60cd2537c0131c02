"""
One function per CLI command.

Each takes a RunConfig, writes its CSV and JSON summary into the output
directory and returns the exit code.
"""
import os
import json
import logging

import numpy as np

from cli.config import (
    DEFAULT_N,
    RunConfig,
    resolve_function,
    resolve_norm,
    resolve_sampled,
)
from cli.output import EXIT_INCONCLUSIVE, EXIT_NEGATIVE, EXIT_PASS, emit
from core.errors import ConfigError, InputError
from core.serialization import format_value
from core.settings import registry_entry
from metricgraph.distances import distance_rows
from metricgraph.sampling import DEFAULT_K
from minkowski.validation import validate_minkowski
from quotientmod.batch import CSV_HEADER as QUOTIENT_HEADER
from quotientmod.batch import DEFAULT_BATCH_SIZE, batch_summary, csv_rows, default_batch, load_instances, run_batch
from smoothing.approximate import CSV_HEADER as SMOOTHING_HEADER
from smoothing.approximate import smooth_approximate
from sobolev.hilbertian import CSV_HEADER as HILBERT_HEADER
from sobolev.hilbertian import hilbertianity_check, refinement_study
from sobolev.wug import DEFAULT_DELTA, DEFAULT_EPS, DEFAULT_LAMBDA

logger = logging.getLogger(__name__)

VALIDATION_SAMPLES = 10_000
DEFAULT_PAIRS = 50
VIOLATION_HEADER = ["axiom", "residual", "vector"]
DISTANCE_HEADER = ["src", "dst", "distance"]
VERDICT_CODES = {"hilbertian_within_tol": EXIT_PASS, "non_hilbertian": EXIT_NEGATIVE,
                 "inconclusive": EXIT_INCONCLUSIVE}


def cmd_validate_norm(config: RunConfig) -> int:
    norm = resolve_norm(config)
    samples = int(config.param("samples", VALIDATION_SAMPLES))
    report = validate_minkowski(norm, sample_count=samples, seed=config.seed)
    rows = [[v.axiom, v.residual, " ".join(format_value(float(c)) for c in v.vector)] for v in report.violations]
    summary = report.to_dict()
    if isinstance(config.norm, str):
        summary["norm_name"] = config.norm
    emit(config.command, config.output_dir, VIOLATION_HEADER, rows, summary)
    if not report.passed:
        logger.warning("norm failed validation: %s", report.violation_counts)
    return EXIT_PASS if report.passed else EXIT_NEGATIVE


def cmd_smooth(config: RunConfig) -> int:
    sampled = resolve_sampled(config)
    f = resolve_function(sampled, config.functions[0])
    _, report = smooth_approximate(
        sampled, f,
        delta=float(config.param("delta", DEFAULT_DELTA)),
        eps=float(config.param("epsilon", DEFAULT_EPS)),
        lam=float(config.param("lambda", DEFAULT_LAMBDA)),
        seed=config.seed,
    )
    summary = {"config": config.to_dict(), **report.to_dict()}
    emit(config.command, config.output_dir, SMOOTHING_HEADER, report.csv_rows(), summary)
    return EXIT_PASS if report.passed else EXIT_NEGATIVE


def _hilbert_params(config: RunConfig) -> dict:
    params = {key: config.params[key] for key in ("delta", "lambda", "rungs", "tol_h", "tol_nh")
              if key in config.params}
    if "epsilon" in config.params:
        params["eps"] = config.params["epsilon"]
    params["seed"] = config.seed
    return params


def _function_spec(ref) -> dict:
    return ref if isinstance(ref, dict) else registry_entry("functions", ref)


def cmd_check_hilbert(config: RunConfig) -> int:
    sampled = resolve_sampled(config)
    f, g = (resolve_function(sampled, ref) for ref in config.functions)
    params = _hilbert_params(config)
    report = hilbertianity_check(sampled, None, f, g, params)
    summary = {"config": config.to_dict(), **report.to_dict()}
    levels = config.param("refinement_levels")
    if levels is not None:
        summary["refinement"] = refinement_study(
            sampled.manifold, _function_spec(config.functions[0]), _function_spec(config.functions[1]),
            n=int(config.param("n", DEFAULT_N)), levels=int(levels), k=int(config.param("k", DEFAULT_K)),
            measure_spec=config.measure, params=params, seed=config.seed,
        )
    emit(config.command, config.output_dir, HILBERT_HEADER, report.csv_rows(), summary)
    return VERDICT_CODES[report.verdict]


def _read_instance_file(config: RunConfig, path: str):
    full = path if os.path.isabs(path) else os.path.join(config.base_dir, path)
    try:
        with open(full) as f:
            return json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"instance file '{path}' not found", key="instances") from None
    except json.JSONDecodeError as e:
        raise InputError(f"instance file '{path}' is not valid JSON: {e}") from None


def quotient_instances(config: RunConfig) -> list:
    """
    Instances of a quotient run: an inline list, a JSON file (relative to the
    config), {"random": {"count", "seed"}}, or the default random batch.
    """
    source = config.instances
    if source is None:
        return default_batch(DEFAULT_BATCH_SIZE, config.seed)
    if isinstance(source, str):
        return load_instances(_read_instance_file(config, source))
    if isinstance(source, dict) and "random" in source:
        spec = source["random"] or {}
        return default_batch(int(spec.get("count", DEFAULT_BATCH_SIZE)), int(spec.get("seed", config.seed)))
    return load_instances(source)


def cmd_quotient(config: RunConfig) -> int:
    instances = quotient_instances(config)
    rows, errors = run_batch(instances)
    summary = batch_summary(rows, errors)
    summary["error_details"] = errors
    emit(config.command, config.output_dir, QUOTIENT_HEADER, csv_rows(rows), summary)
    return EXIT_PASS if summary["passed"] else EXIT_NEGATIVE


def _distance_pairs(config: RunConfig, n: int):
    if "sources" in config.params or "targets" in config.params:
        sources = config.param("sources", [0])
        targets = config.param("targets", list(range(n)))
        return sources, targets
    rng = np.random.default_rng(config.seed)
    pairs = int(config.param("pairs", DEFAULT_PAIRS))
    sources = rng.integers(0, n, size=pairs)
    targets = rng.integers(0, n, size=pairs)
    return sources, targets


def cmd_distances(config: RunConfig) -> int:
    sampled = resolve_sampled(config)
    sources, targets = _distance_pairs(config, sampled.n)
    if "sources" in config.params or "targets" in config.params:
        rows = distance_rows(sampled, sources, targets)
    else:
        # seeded pairs are matched one-to-one, not crossed
        rows = [distance_rows(sampled, [s], [t])[0] for s, t in zip(sources, targets)]
    summary = {"config": config.to_dict(), "pairs": len(rows), "n": sampled.n, "k": sampled.k}
    dist = np.array([row[2] for row in rows])
    summary["unreachable"] = int(np.sum(~np.isfinite(dist)))
    manifold = sampled.manifold
    if manifold.has_closed_form_log and rows:
        src = sampled.points[[row[0] for row in rows]]
        dst = sampled.points[[row[1] for row in rows]]
        exact = np.asarray(manifold.distance(src, dst), dtype=float)
        positive = exact > 0
        rel = np.abs(dist[positive] - exact[positive]) / exact[positive]
        summary["analytic"] = {
            "median_relative_error": float(np.median(rel)) if len(rel) else 0.0,
            "max_relative_error": float(np.max(rel)) if len(rel) else 0.0,
        }
    emit(config.command, config.output_dir, DISTANCE_HEADER, rows, summary)
    return EXIT_PASS if summary["unreachable"] == 0 else EXIT_NEGATIVE


COMMAND_HANDLERS = {
    "validate-norm": cmd_validate_norm,
    "smooth": cmd_smooth,
    "check-hilbert": cmd_check_hilbert,
    "quotient": cmd_quotient,
    "distances": cmd_distances,
}
