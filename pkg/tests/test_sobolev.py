import math

import numpy as np
import pytest

from core.errors import InputError
from manifold import get_manifold
from metricgraph import ScalarField, WeightedMeasure, field_from_values, get_function, sample_manifold
from minkowski import dual_norm
from sobolev import (
    cauchy_schwarz_audit,
    classify,
    covector_field,
    differential_field,
    effective_support,
    hilbertianity_check,
    module_parallelogram_defect,
    pairing,
    pointwise_differential,
    refinement_study,
    vector_field,
    wug_estimate,
    wug_ladder,
)


TORUS_MEASURES = {
    "uniform": {"density": "uniform"},
    "wave": {"density": "wave", "amplitude": 0.5, "axis": 0},
    "mixed": {"density": "uniform", "density_mass": 0.5, "random_atoms": {"count": 30, "mass": 0.5 / 30}},
}


@pytest.fixture(scope="module")
def small_square():
    return sample_manifold(get_manifold("unit_square"), 150, {"density": "uniform"}, seed=11)


@pytest.fixture(scope="module")
def l4_cloud():
    return sample_manifold(get_manifold("unit_square_l4"), 200, {"density": "uniform"}, seed=13)


@pytest.fixture(scope="module")
def sphere_cloud(sphere):
    return sample_manifold(sphere, 400, {"density": "uniform"}, seed=17)


class TestPointwiseDifferential:
    def test_linear(self, square_cloud):
        f = get_function(square_cloud, "linear_diag")
        assert pointwise_differential(f, square_cloud, 7) == pytest.approx([1.0, -2.0], abs=1e-10)

    def test_constant(self, square_cloud):
        f = get_function(square_cloud, "one")
        assert pointwise_differential(f, square_cloud, 3) == pytest.approx([0.0, 0.0], abs=1e-12)

    def test_half_square_norm(self, square_cloud):
        f = ScalarField(0.5 * np.sum(square_cloud.points ** 2, axis=1),
                        lambda x: 0.5 * np.sum(np.asarray(x) ** 2, axis=-1), "half_sq")
        for x in (0, 11, 42):
            assert pointwise_differential(f, square_cloud, x) == pytest.approx(square_cloud.points[x], abs=1e-8)

    def test_sphere_coordinate(self, sphere_cloud, sphere):
        f = get_function(sphere_cloud, "coordinate_z")
        x = 5
        expected = sphere.frame(sphere_cloud.points[x]).T @ np.array([0.0, 0.0, 1.0])
        assert pointwise_differential(f, sphere_cloud, x) == pytest.approx(expected, abs=1e-7)

    def test_sample_only_field(self, square_cloud):
        f = field_from_values(square_cloud.points[:, 0])
        with pytest.raises(InputError):
            pointwise_differential(f, square_cloud, 0)

    def test_index_out_of_range(self, square_cloud):
        f = get_function(square_cloud, "linear_x")
        with pytest.raises(InputError):
            pointwise_differential(f, square_cloud, square_cloud.n)


class TestFields:
    def test_covector_norms_are_dual_norms(self, l4_cloud, rng):
        omega = covector_field(l4_cloud, rng.standard_normal((l4_cloud.n, 2)))
        norm = l4_cloud.manifold.norm
        for i in (0, 50, 199):
            assert omega.norms[i] == pytest.approx(dual_norm(norm, omega.covectors[i]), rel=1e-9)
        assert omega.recompute_norms() == pytest.approx(omega.norms)

    def test_cauchy_schwarz(self, l4_cloud, rng):
        omega = covector_field(l4_cloud, rng.standard_normal((l4_cloud.n, 2)))
        v = vector_field(l4_cloud, rng.standard_normal((l4_cloud.n, 2)))
        audit = cauchy_schwarz_audit(omega, v)
        assert audit["ok"]
        assert audit["max_ratio"] <= 1.0 + 1e-9

    def test_module_parallelogram_on_inner_product(self, square_cloud, rng):
        v = vector_field(square_cloud, rng.standard_normal((square_cloud.n, 2)))
        w = vector_field(square_cloud, rng.standard_normal((square_cloud.n, 2)))
        assert module_parallelogram_defect(v, w)["relative"] <= 1e-12

    def test_module_parallelogram_on_l4(self, l4_cloud):
        e1 = vector_field(l4_cloud, np.tile([1.0, 0.0], (l4_cloud.n, 1)))
        e2 = vector_field(l4_cloud, np.tile([0.0, 1.0], (l4_cloud.n, 1)))
        result = module_parallelogram_defect(e1, e2)
        assert result["defect"] == pytest.approx(np.full(l4_cloud.n, 4.0 * math.sqrt(0.5) - 4.0), rel=1e-9)
        assert result["relative"] > 0.25

    def test_pairing_needs_shared_samples(self, square_cloud, small_square):
        omega = covector_field(square_cloud, np.ones((square_cloud.n, 2)))
        v = vector_field(small_square, np.ones((small_square.n, 2)))
        with pytest.raises(InputError):
            pairing(omega, v)

    def test_wrong_shape(self, square_cloud):
        with pytest.raises(InputError):
            covector_field(square_cloud, np.ones((3, 2)))


class TestWug:
    def test_constant_is_zero(self, small_square):
        f = get_function(small_square, "one")
        assert np.all(wug_estimate(f, small_square) == 0.0)

    def test_linear_matches_dual_norm(self, l4_cloud):
        f = get_function(l4_cloud, "linear_diag")
        expected = dual_norm(l4_cloud.manifold.norm, np.array([1.0, -2.0]))
        w = wug_estimate(f, l4_cloud, rungs=2)
        assert np.all(np.abs(w - expected) <= 0.02 * expected)

    def test_ladder_is_monotone(self, small_square):
        f = get_function(small_square, "cone_center")
        two = wug_estimate(f, small_square, rungs=2)
        three = wug_estimate(f, small_square, rungs=3)
        assert np.all(two >= three)

    def test_estimate_below_every_rung(self, small_square):
        f = get_function(small_square, "wave_x")
        ladder = wug_ladder(f, small_square, rungs=2)
        for rung in ladder.rungs:
            assert np.all(ladder.estimate <= rung.norms)
            assert rung.l2_distance <= rung.eps * ladder.lipschitz * math.sqrt(small_square.total_mass) + 1e-12
        assert [row["rung"] for row in ladder.to_dict()["rungs"]] == [0, 1]

    def test_smoothed_differential(self, small_square):
        f = get_function(small_square, "linear_diag")
        ladder = wug_ladder(f, small_square, rungs=1)
        assert np.allclose(ladder.estimate, math.sqrt(5.0), rtol=1e-3)

    def test_sample_only_field(self, small_square):
        f = field_from_values(small_square.points[:, 0], tag="x")
        with pytest.raises(InputError):
            wug_estimate(f, small_square)

    def test_differential_field_of_linear(self, small_square):
        f = get_function(small_square, "linear_x")
        omega = differential_field(f, small_square)
        assert omega.norms == pytest.approx(np.ones(small_square.n), abs=1e-9)


class TestHilbertianity:
    def test_equal_fields_have_zero_defect(self, small_square):
        f = get_function(small_square, "cone_center")
        report = hilbertianity_check(small_square, None, f, f, {"rungs": 1})
        assert np.all(report.defect == 0.0)
        assert report.verdict == "hilbertian_within_tol"

    def test_defect_scales_quadratically(self, small_square):
        f = get_function(small_square, "linear_x")
        g = get_function(small_square, "cone_center")
        base = hilbertianity_check(small_square, None, f, g, {"rungs": 1})
        scaled = hilbertianity_check(small_square, None, 2.0 * f, 2.0 * g, {"rungs": 1})
        assert np.array_equal(scaled.defect, 4.0 * base.defect)

    def test_l4_is_not_hilbertian(self, l4_cloud):
        f = get_function(l4_cloud, "linear_x")
        g = get_function(l4_cloud, "linear_y")
        report = hilbertianity_check(l4_cloud, None, f, g, {"rungs": 2})
        expected = 2.0 * 2.0 ** 1.5 - 4.0
        assert np.median(report.defect) == pytest.approx(expected, rel=0.05)
        assert report.relative == pytest.approx(expected / 4.0, rel=0.05)
        assert report.verdict == "non_hilbertian"
        assert report.sandwich == {"applicable": False}

    def test_sphere_is_hilbertian(self, sphere_cloud):
        f = get_function(sphere_cloud, "coordinate_x")
        g = get_function(sphere_cloud, "coordinate_y")
        report = hilbertianity_check(sphere_cloud, None, f, g)
        assert report.relative <= 0.02
        assert report.verdict == "hilbertian_within_tol"
        assert report.sandwich["applicable"]
        assert report.sandwich["fraction_ok"] >= 0.99
        rows = report.csv_rows()
        assert len(rows) == sphere_cloud.n and len(rows[0]) == 7

    def test_atomic_measure_is_inconclusive(self, small_square):
        weights = np.zeros(small_square.n)
        weights[:5] = 1.0
        f = get_function(small_square, "linear_x")
        g = get_function(small_square, "linear_y")
        report = hilbertianity_check(small_square, WeightedMeasure(weights), f, g, {"rungs": 1})
        assert report.support == 5
        assert report.verdict == "inconclusive"

    def test_measure_length_mismatch(self, small_square):
        f = get_function(small_square, "linear_x")
        with pytest.raises(InputError):
            hilbertianity_check(small_square, WeightedMeasure(np.ones(3)), f, f)

    def test_refinement_on_flat_square(self):
        study = refinement_study(get_manifold("unit_square"), {"kind": "linear", "covector": [1.0, 0.0]},
                                 {"kind": "linear", "covector": [0.0, 1.0]}, 60, levels=2,
                                 params={"rungs": 1})
        assert [row["n"] for row in study["rows"]] == [60, 240]
        assert study["rows"][1]["k"] == 27
        assert study["decreasing"]

    @pytest.mark.parametrize("measure", sorted(TORUS_MEASURES))
    def test_flat_torus_under_weighted_measures(self, torus, measure):
        cloud = sample_manifold(torus, 300, TORUS_MEASURES[measure], seed=5)
        f = get_function(cloud, "wave_x")
        g = get_function(cloud, "wave_xy")
        report = hilbertianity_check(cloud, None, f, g, {"rungs": 2})
        assert report.support >= 32
        assert report.relative <= 0.02
        assert report.verdict == "hilbertian_within_tol"
        assert report.sandwich["applicable"]

    def test_refinement_on_the_sphere(self, sphere):
        study = refinement_study(sphere, {"kind": "coordinate", "axis": 0}, {"kind": "coordinate", "axis": 1}, 300,
                                 levels=2, params={"rungs": 2}, seed=17)
        assert [row["n"] for row in study["rows"]] == [300, 1200]
        assert study["rows"][0]["relative"] <= 0.02
        assert study["decreasing"]


class TestVerdict:
    def test_effective_support(self):
        assert effective_support(np.ones(100)) == 99
        assert effective_support(np.array([1.0, 0.0, 0.0])) == 1

    @pytest.mark.parametrize("relative,agreement,support,verdict", [
        (0.01, 1.0, 100, "hilbertian_within_tol"),
        (0.41, 0.95, 100, "non_hilbertian"),
        (0.41, 0.5, 100, "inconclusive"),
        (0.05, 1.0, 100, "inconclusive"),
        (0.0, 1.0, 10, "inconclusive"),
    ])
    def test_classify(self, relative, agreement, support, verdict):
        assert classify(relative, agreement, support) == verdict
