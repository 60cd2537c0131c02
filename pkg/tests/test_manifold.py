import math

import numpy as np
import pytest

from core.errors import InputError, NumericError, SearchFailureError
from manifold import (
    bilipschitz_radius,
    build_chart,
    certified_chart,
    chart_distortion,
    christoffel_symbols,
    exp_map,
    geodesic_shoot,
    get_manifold,
    manifold_from_dict,
    manifold_names,
    rk4_integrate,
    speed_profile,
)

NORTH = np.array([0.0, 0.0, 1.0])


class TestGeodesicShoot:
    def test_straight_line(self, square):
        np.testing.assert_allclose(geodesic_shoot(square, [0.0, 0.0], [1.0, 2.0], 1.0, 32), [1.0, 2.0], atol=1e-12)

    def test_quarter_great_circle(self, sphere):
        end = geodesic_shoot(sphere, NORTH, [1.0, 0.0, 0.0], math.pi / 2, 64)
        assert abs(end[2]) < 1e-6
        assert np.linalg.norm(end) == pytest.approx(1.0, abs=1e-12)

    def test_torus_wraps(self, torus):
        np.testing.assert_allclose(geodesic_shoot(torus, [0.9, 0.0], [1.0, 0.0], 0.2, 16), [0.1, 0.0], atol=1e-12)

    def test_too_few_steps(self, square):
        with pytest.raises(InputError):
            geodesic_shoot(square, [0.0, 0.0], [1.0, 0.0], 1.0, 8)

    def test_point_off_sphere(self, sphere):
        with pytest.raises(InputError):
            geodesic_shoot(sphere, [0.0, 0.0, 2.0], [1.0, 0.0, 0.0], 1.0, 32)

    def test_blow_up_is_reported(self):
        with pytest.raises(NumericError) as info:
            rk4_integrate(lambda x, v: x * 1e3, np.array([1.0]), np.array([0.0]), 1.0, 16, bound=1e6)
        assert "step" in info.value.diagnostics

    def test_fourth_order_convergence(self, sphere):
        v = np.array([1.3, 0.4, 0.0])
        exact = sphere.exp(NORTH, 2.0 * v)
        coarse = np.linalg.norm(geodesic_shoot(sphere, NORTH, v, 2.0, 16) - exact)
        fine = np.linalg.norm(geodesic_shoot(sphere, NORTH, v, 2.0, 32) - exact)
        assert coarse >= 8.0 * fine

    @pytest.mark.parametrize("name,tol", [("wave_torus", 1e-4), ("unit_sphere", 1e-4), ("finsler_plane", 1e-3)])
    def test_speed_is_conserved(self, name, tol):
        m = get_manifold(name)
        x = m.sample_uniform(1, seed=2)[0]
        v = m.frame(x) @ np.array([0.6, -0.35])
        speeds = speed_profile(m, x, v, 1.0, 64)
        assert np.max(np.abs(speeds - speeds[0])) <= tol * speeds[0]


class TestExpLog:
    @pytest.mark.parametrize("name", ["unit_square", "unit_sphere", "flat_torus", "wave_torus", "finsler_plane"])
    def test_exp_of_zero(self, name):
        m = get_manifold(name)
        x = m.sample_uniform(1, seed=0)[0]
        np.testing.assert_allclose(exp_map(m, x, np.zeros(m.ambient_dim)), x, atol=1e-12)

    def test_euclidean_exp(self, square):
        np.testing.assert_allclose(exp_map(square, [0.2, 0.3], [0.5, -0.1]), [0.7, 0.2])

    def test_sphere_antipode(self, sphere):
        np.testing.assert_allclose(exp_map(sphere, NORTH, [math.pi, 0.0, 0.0]), -NORTH, atol=1e-5)

    def test_sphere_integrator_matches_closed_form(self, sphere):
        v = np.array([0.7, -0.2, 0.0])
        np.testing.assert_allclose(geodesic_shoot(sphere, NORTH, v, 1.0, 64), sphere.exp(NORTH, v), atol=1e-7)

    @pytest.mark.parametrize("name", ["wave_torus", "finsler_plane"])
    def test_rescaled_exp_matches_shooting(self, name):
        m = get_manifold(name)
        x = np.array([0.3, 0.6])
        v = np.array([0.25, 0.1])
        for t in (0.25, 0.5, 1.0):
            np.testing.assert_allclose(m.exp(x, t * v), geodesic_shoot(m, x, v, t, 64), atol=1e-6)

    @pytest.mark.parametrize("name", ["wave_torus", "finsler_plane", "flat_torus", "unit_sphere"])
    def test_log_inverts_exp(self, name):
        m = get_manifold(name)
        pts = m.sample_uniform(6, seed=4)
        x = pts[0]
        v = 0.1 * np.stack([m.frame(x) @ d for d in np.random.default_rng(0).standard_normal((5, 2))])
        y = m.exp(x, v)
        np.testing.assert_allclose(m.log(x, y), v, atol=1e-7)

    def test_torus_log_uses_min_image(self, torus):
        np.testing.assert_allclose(torus.log([0.95, 0.5], [0.05, 0.5]), [0.1, 0.0], atol=1e-12)
        assert torus.distance([0.95, 0.5], [0.05, 0.5]) == pytest.approx(0.1)

    def test_sphere_distance(self, sphere):
        assert sphere.distance(NORTH, [1.0, 0.0, 0.0]) == pytest.approx(math.pi / 2)


class TestChristoffel:
    def test_conformal_metric(self):
        m = get_manifold("wave_torus")
        x = np.array([[0.13, 0.71]])
        gamma = christoffel_symbols(m.metric, x)[0]
        h = 1e-6
        phi = m.metric(x)[0, 0, 0]
        grad = np.array([(m.metric(x + h * e)[0, 0, 0] - m.metric(x - h * e)[0, 0, 0]) / (2 * h) for e in np.eye(2)])
        d = np.eye(2)
        expected = 0.5 / phi * (np.einsum("ij,k->ijk", d, grad) + np.einsum("ik,j->ijk", d, grad)
                                - np.einsum("jk,i->ijk", d, grad))
        np.testing.assert_allclose(gamma, expected, atol=1e-7)

    def test_flat_metric_vanishes(self, torus):
        assert np.allclose(christoffel_symbols(torus.metric, np.array([[0.2, 0.4]])), 0.0)


class TestBiLipschitz:
    @pytest.mark.parametrize("name", ["unit_square", "unit_square_l1", "unit_square_quartic"])
    def test_euclidean_is_global_isometry(self, name):
        m = get_manifold(name)
        r, distortion = bilipschitz_radius(m, [0.5, 0.5], 0.01, budget=64, seed=0)
        assert r == m.injectivity_hint
        assert distortion == pytest.approx(1.0, abs=1e-9)

    def test_sphere_certificate(self, sphere):
        x = sphere.sample_uniform(1, seed=9)[0]
        r, distortion = bilipschitz_radius(sphere, x, 0.1, budget=128, seed=1)
        assert distortion <= 1.1
        chart = build_chart(sphere, x, r, 1.1, distortion)
        assert chart_distortion(sphere, chart, budget=128, seed=77) <= chart.bilip_constant

    def test_monotone_in_tolerance(self, sphere):
        x = sphere.sample_uniform(1, seed=3)[0]
        small, _ = bilipschitz_radius(sphere, x, 0.05, budget=64, seed=2)
        large, _ = bilipschitz_radius(sphere, x, 0.2, budget=64, seed=2)
        assert small <= large

    def test_torus_radius(self, torus):
        r, _ = bilipschitz_radius(torus, [0.5, 0.5], 0.01, budget=64, seed=0)
        assert r <= 0.25

    def test_exhausted_search(self, sphere):
        with pytest.raises(SearchFailureError):
            bilipschitz_radius(sphere, NORTH, 1e-14, budget=16, seed=0)

    def test_rejects_bad_tolerance(self, sphere):
        with pytest.raises(InputError):
            bilipschitz_radius(sphere, NORTH, 0.0)


class TestCharts:
    def test_chart_maps_invert(self, sphere):
        chart = certified_chart(sphere, NORTH, 0.1, budget=64, seed=0)
        u = np.array([[0.1, -0.05], [0.0, 0.2]])
        np.testing.assert_allclose(chart.forward(chart.inverse(u)), u, atol=1e-10)
        assert chart.equiv_constant == pytest.approx(1.0)
        assert np.all(chart.contains(chart.inverse(0.5 * chart.radius * np.eye(2))))

    def test_finsler_plane_chart_norm(self):
        m = get_manifold("finsler_plane")
        chart = build_chart(m, [0.4, 0.4], 0.05, 1.05)
        assert chart.chart_norm.family == "quartic_blend"
        assert chart.chart_norm.theta == pytest.approx(float(m.theta(np.array([0.4, 0.4]))))
        assert chart.equiv_constant >= 1.0


class TestRegistry:
    @pytest.mark.parametrize("name", manifold_names())
    def test_round_trip(self, name):
        m = get_manifold(name)
        again = manifold_from_dict(m.to_dict())
        x = m.sample_uniform(3, seed=1)
        v = 0.1 * np.stack([m.frame(p) @ np.array([1.0, 0.5])[: m.intrinsic_dim] for p in x])
        np.testing.assert_allclose(again.finsler(x, v), m.finsler(x, v))

    def test_unknown_kind(self):
        with pytest.raises(InputError):
            manifold_from_dict({"kind": "klein_bottle"})
