"""Batch runs over quotient instances."""
import logging

import numpy as np

from core.errors import FinslerKitError, InputError
from quotientmod.instance import instance_from_dict, random_instances
from quotientmod.projection import iota_embed, minimal_lift, project_P

logger = logging.getLogger(__name__)

CSV_HEADER = ["id", "class_norm", "lift_norm", "abstract_norm", "concrete_norm", "gap"]
DEFAULT_BATCH_SIZE = 200
GAP_TOL = 1e-6
LIFT_TOL = 1e-8
ISOMETRY_TOL = 1e-6


def evaluate_instance(inst) -> dict:
    """One batch row: class and lift norms of the representative, both norms of the vector, solver gap."""
    element = project_P(inst, inst.representative)
    lift = minimal_lift(inst, element)
    embedded = iota_embed(inst, inst.vector)
    return {
        "id": inst.id,
        "class_norm": element.class_norm,
        "lift_norm": inst.dual.value(lift),
        "abstract_norm": embedded.abstract_norm,
        "concrete_norm": embedded.concrete_norm,
        "gap": element.gap,
        "dual_norm": inst.dual.value(inst.representative),
        "method": element.method,
    }


def run_batch(instances) -> tuple[list, list]:
    """
    Evaluate every instance.
    Returns (rows, errors) tuple; a failing instance adds an error entry and no row.
    """
    rows, errors = [], []
    for inst in instances:
        try:
            rows.append(evaluate_instance(inst))
        except FinslerKitError as e:
            logger.warning("instance %s failed: %s", inst.id, e)
            errors.append({"id": inst.id, "error": type(e).__name__, "message": str(e),
                           "diagnostics": getattr(e, "diagnostics", {})})
    return rows, errors


def load_instances(documents) -> list:
    """Instances from a list of documents, or from {"instances": [...]}."""
    if isinstance(documents, dict):
        documents = documents.get("instances", documents.get("entries"))
    if not isinstance(documents, list):
        raise InputError("instance file must hold a list of instances")
    return [instance_from_dict(doc, i) for i, doc in enumerate(documents)]


def default_batch(count: int = DEFAULT_BATCH_SIZE, seed: int = 0) -> list:
    return random_instances(count, seed)


def csv_rows(rows: list) -> list:
    return [[row[key] for key in CSV_HEADER] for row in rows]


def batch_summary(rows: list, errors: list) -> dict:
    """Worst-case gap, lift, isometry and contraction figures of a batch."""
    if not rows:
        return {"instances": 0, "errors": len(errors), "passed": not errors}
    gaps = np.array([row["gap"] for row in rows])
    lift = np.array([abs(row["lift_norm"] - row["class_norm"]) for row in rows])
    isometry = np.array([abs(row["abstract_norm"] - row["concrete_norm"]) for row in rows])
    contraction = [row["id"] for row in rows if row["class_norm"] > row["dual_norm"]]
    summary = {
        "instances": len(rows),
        "errors": len(errors),
        "max_gap": float(np.max(np.abs(gaps))),
        "max_lift_defect": float(np.max(lift)),
        "max_isometry_defect": float(np.max(isometry)),
        "contraction_violations": contraction,
        "methods": {m: sum(1 for row in rows if row["method"] == m) for m in sorted({r["method"] for r in rows})},
    }
    summary["passed"] = (not errors and not contraction and summary["max_gap"] <= GAP_TOL
                         and summary["max_lift_defect"] <= LIFT_TOL
                         and summary["max_isometry_defect"] <= ISOMETRY_TOL)
    return summary
