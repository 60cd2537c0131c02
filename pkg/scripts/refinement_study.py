#!/usr/bin/env python3
"""
Refinement studies at full sample counts.

Runs the graph-distance convergence check on the unit square and the sphere,
then the Hilbertianity refinement on the sphere and the flat torus under
three weighted measures. Results go to <output dir>/refinement_study.json.

Usage:
    python scripts/refinement_study.py

Environment:
    FINSLERKIT_OUTPUT_DIR (optional, default "out")
"""

import os
import sys
import math
import time

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
from dotenv import load_dotenv

from core.serialization import write_json
from core.settings import DEFAULT_OUTPUT_DIR, registry_entry
from manifold.registry import get_manifold
from metricgraph.distances import graph_distance
from metricgraph.sampling import sample_manifold
from sobolev.hilbertian import refinement_study

load_dotenv()

# Configuration - lower these for a quick smoke run
DISTANCE_SIZES = (5000, 20000)   # n, then a refinement
DISTANCE_K = 12
DISTANCE_PAIRS = 50
DISTANCE_TOL = 0.05              # median relative error at the first size
CONVERGENCE_GATE = 1.2           # required error reduction per refinement
HILBERT_N = 1500
HILBERT_LEVELS = 2               # n, 4n
HILBERT_TOL = 0.02
SEED = 0

MEASURES = {
    "uniform": {"density": "uniform"},
    "wave": {"density": "wave", "amplitude": 0.5, "axis": 0},
    "mixed": {"density": "uniform", "density_mass": 0.5, "random_atoms": {"count": 100, "mass": 0.005}},
}
HILBERT_CASES = [
    ("unit_sphere", "coordinate_x", "coordinate_y"),
    ("flat_torus", "wave_x", "wave_xy"),
]

OUTPUT_FILE = os.path.join(DEFAULT_OUTPUT_DIR, "refinement_study.json")


def nearest_sample(sampled, point) -> int:
    return int(np.argmin(np.linalg.norm(sampled.points - np.asarray(point, dtype=float), axis=1)))


def square_distance_errors(n: int) -> dict:
    """Median relative graph-distance error over seeded pairs."""
    square = get_manifold("unit_square")
    sampled = sample_manifold(square, n, {"density": "uniform"}, seed=SEED, k=DISTANCE_K)
    rng = np.random.default_rng(SEED)
    sources = rng.integers(0, sampled.n, size=DISTANCE_PAIRS)
    targets = rng.integers(0, sampled.n, size=DISTANCE_PAIRS)
    graph = np.array([graph_distance(sampled, [s], [t])[0, 0] for s, t in zip(sources, targets)])
    exact = square.distance(sampled.points[sources], sampled.points[targets])
    keep = exact > 0
    rel = np.abs(graph[keep] - exact[keep]) / exact[keep]
    return {"n": sampled.n, "median_relative_error": float(np.median(rel))}


def sphere_quarter_arc(n: int) -> dict:
    sphere = get_manifold("unit_sphere")
    sampled = sample_manifold(sphere, n, {"density": "uniform"}, seed=SEED, k=DISTANCE_K)
    north = nearest_sample(sampled, [0.0, 0.0, 1.0])
    equator = nearest_sample(sampled, [1.0, 0.0, 0.0])
    graph = float(graph_distance(sampled, [north], [equator])[0, 0])
    exact = float(sphere.distance(sampled.points[north], sampled.points[equator]))
    return {"n": sampled.n, "graph": graph, "exact": exact, "relative_error": abs(graph - exact) / exact,
            "target": math.pi / 2}


def main():
    started = time.time()
    results = {"distances": {}, "hilbertianity": []}
    failures = 0

    print("Graph distance convergence")
    print("=" * 60)
    levels = [square_distance_errors(n) for n in DISTANCE_SIZES]
    for level in levels:
        print(f"  unit_square n={level['n']}: median relative error {level['median_relative_error']:.4f}")
    coarse, fine = levels[0]["median_relative_error"], levels[-1]["median_relative_error"]
    converged = coarse <= DISTANCE_TOL and (fine <= 1e-12 or coarse / fine >= CONVERGENCE_GATE)
    arc = sphere_quarter_arc(DISTANCE_SIZES[0])
    print(f"  unit_sphere north->equator: {arc['graph']:.4f} vs {arc['exact']:.4f}")
    arc_ok = arc["relative_error"] <= DISTANCE_TOL
    failures += (not converged) + (not arc_ok)
    results["distances"] = {"square": levels, "converged": converged, "sphere": arc, "sphere_ok": arc_ok}

    print("\nHilbertianity refinement")
    print("=" * 60)
    for manifold_name, f_name, g_name in HILBERT_CASES:
        manifold = get_manifold(manifold_name)
        f_spec, g_spec = registry_entry("functions", f_name), registry_entry("functions", g_name)
        for measure_name, measure in MEASURES.items():
            study = refinement_study(manifold, f_spec, g_spec, n=HILBERT_N, levels=HILBERT_LEVELS,
                                     measure_spec=measure, seed=SEED)
            relative = [row["relative"] for row in study["rows"]]
            ok = relative[0] <= HILBERT_TOL and study["decreasing"]
            failures += not ok
            print(f"  {manifold_name:12s} {measure_name:8s} relative "
                  f"{' -> '.join(f'{r:.5f}' for r in relative)} {'ok' if ok else 'FAIL'}")
            results["hilbertianity"].append({"manifold": manifold_name, "measure": measure_name,
                                             "f": f_name, "g": g_name, "ok": ok, **study})

    results["failures"] = failures
    results["seconds"] = round(time.time() - started, 1)
    write_json(OUTPUT_FILE, results)

    print("\n" + "=" * 60)
    print("DONE!")
    print(f"  Failed checks: {failures}")
    print(f"  Elapsed: {results['seconds']} s")
    print(f"  Saved to: {OUTPUT_FILE}")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
