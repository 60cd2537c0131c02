import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.errors import InputError
from minkowski import (
    closed_form_dual,
    custom_table,
    dual_norm,
    dual_norm_ascent,
    dual_table_norm,
    equivalence_constant,
    euclidean,
    eval_norm,
    get_norm,
    is_inner_product,
    parallelogram_defect,
    quartic_blend,
    recover_gram,
    validate_minkowski,
    weighted_lp,
)
from minkowski.norms import MinkowskiNorm


BUILTIN = ["euclidean2", "skewed_inner2", "l1_2", "l4_2", "linf_2", "weighted_l3_2", "quartic_blend2"]


@st.composite
def vector_pairs(draw, dim=2):
    seed = draw(st.integers(min_value=0, max_value=2**31 - 1))
    rng = np.random.RandomState(seed)
    scale = draw(st.floats(min_value=0.01, max_value=100.0))
    return rng.standard_normal(dim) * scale, rng.standard_normal(dim) * scale


class TestEvalNorm:
    def test_pythagorean(self):
        assert eval_norm(euclidean(2), [3.0, 4.0]) == pytest.approx(5.0, abs=1e-15)

    @pytest.mark.parametrize("name", BUILTIN)
    def test_zero_vector(self, name):
        assert eval_norm(get_norm(name), [0.0, 0.0]) == 0.0

    def test_l4_of_ones(self):
        assert eval_norm(weighted_lp(2, 4.0), [1.0, 1.0]) == pytest.approx(2.0 ** 0.25, abs=1e-12)

    def test_linf_and_weights(self):
        assert eval_norm(weighted_lp(2, "inf", [1.0, 3.0]), [2.0, -1.0]) == pytest.approx(3.0)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            eval_norm(euclidean(2), [1.0, 2.0, 3.0])

    def test_document_round_trip(self):
        norm = weighted_lp(2, 3.0, [1.0, 2.0])
        again = MinkowskiNorm.from_dict(norm.to_dict())
        v = np.array([[0.3, -1.2], [2.0, 0.5]])
        np.testing.assert_allclose(again.evaluate(v), norm.evaluate(v))

    def test_invalid_parameters(self):
        with pytest.raises(InputError):
            weighted_lp(2, 0.5)
        with pytest.raises(InputError):
            quartic_blend(2, 1.5)
        with pytest.raises(InputError):
            euclidean(2, [[1.0, 2.0], [2.0, 1.0]])

    def test_lp_large_entries_do_not_overflow(self):
        assert eval_norm(weighted_lp(2, 8.0), [1e200, 1e200]) == pytest.approx(1e200 * 2.0 ** 0.125)


class TestValidateMinkowski:
    def test_euclidean_passes_with_hessian_two(self):
        report = validate_minkowski(euclidean(2), sample_count=1000, seed=0)
        assert report.passed
        assert report.min_hessian_eigenvalue == pytest.approx(2.0, rel=1e-4)

    def test_abs_first_coordinate_is_degenerate(self):
        report = validate_minkowski(get_norm("degenerate_abs_v1"), sample_count=200, seed=0)
        assert not report.passed
        flagged = [v.vector for v in report.violations if v.axiom == "positive_definite"]
        assert any(abs(v[0]) < 1e-12 and abs(v[1]) > 0 for v in flagged)

    def test_l1_fails_strong_convexity(self):
        report = validate_minkowski(weighted_lp(2, 1.0), sample_count=200, seed=1)
        assert not report.passed
        assert report.violation_counts["strong_convexity"] > 0

    @pytest.mark.parametrize("name", ["euclidean2", "skewed_inner2", "quartic_blend2", "euclidean3"])
    def test_smooth_builtins_pass(self, name):
        assert validate_minkowski(get_norm(name), sample_count=300, seed=2).passed

    def test_deterministic(self):
        a = validate_minkowski(get_norm("l1_2"), sample_count=100, seed=7).to_dict()
        b = validate_minkowski(get_norm("l1_2"), sample_count=100, seed=7).to_dict()
        assert a == b

    def test_report_consistency(self):
        report = validate_minkowski(get_norm("linf_2"), sample_count=100, seed=3)
        assert report.passed == (not report.violations and report.min_hessian_eigenvalue > 0)


class TestDualNorm:
    def test_euclidean_self_dual(self):
        assert dual_norm(euclidean(2), [3.0, 4.0]) == pytest.approx(5.0, abs=1e-12)
        assert dual_norm_ascent(euclidean(2), [3.0, 4.0]).value == pytest.approx(5.0, abs=1e-8)

    def test_l1_dual_is_linf(self):
        assert dual_norm(weighted_lp(2, 1.0), [2.0, -5.0]) == pytest.approx(5.0)
        assert dual_norm(weighted_lp(2, 1.0), [2.0, -5.0], method="ascent") == pytest.approx(5.0, abs=1e-6)

    def test_l4_dual(self):
        expected = 2.0 ** 0.75
        assert dual_norm(weighted_lp(2, 4.0), [1.0, 1.0]) == pytest.approx(expected, abs=1e-12)
        assert dual_norm(weighted_lp(2, 4.0), [1.0, 1.0], method="ascent") == pytest.approx(expected, abs=1e-6)
        assert dual_norm(weighted_lp(2, 4.0), [1.0, 1.0], method="newton") == pytest.approx(expected, abs=1e-9)

    def test_ascent_is_a_lower_bound(self):
        norm = quartic_blend(2, 0.7)
        rng = np.random.default_rng(0)
        for omega in rng.standard_normal((10, 2)):
            ascent = dual_norm(norm, omega, method="ascent")
            newton = dual_norm(norm, omega, method="newton")
            assert ascent <= newton + 1e-9
            assert ascent == pytest.approx(newton, abs=1e-6)

    def test_three_dimensional_ascent(self):
        omega = np.array([0.3, -1.0, 2.0])
        value = dual_norm(euclidean(3), omega, method="ascent")
        assert value == pytest.approx(float(np.linalg.norm(omega)), abs=1e-6)

    @pytest.mark.parametrize("dim", [2, 3])
    @pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
    def test_ascent_sweep_matches_closed_form(self, p, dim):
        norm = weighted_lp(dim, p)
        dual = closed_form_dual(norm)
        for omega in np.random.default_rng(2024).standard_normal((100, dim)):
            exact = float(dual.evaluate(omega))
            ascent = dual_norm(norm, omega, method="ascent")
            assert ascent <= exact * (1.0 + 1e-12)
            assert ascent == pytest.approx(exact, rel=1e-6)

    def test_zero_covector(self):
        assert dual_norm(get_norm("quartic_blend2"), [0.0, 0.0]) == 0.0

    @settings(max_examples=25, deadline=None)
    @given(vector_pairs())
    def test_dual_is_a_norm(self, pair):
        omega, eta = pair
        norm = get_norm("quartic_blend2")
        a, b, s = dual_norm(norm, omega), dual_norm(norm, eta), dual_norm(norm, omega + eta)
        assert s <= a + b + 1e-6 * max(1.0, a + b)
        assert dual_norm(norm, 3.0 * omega) == pytest.approx(3.0 * a, rel=1e-6)

    @pytest.mark.parametrize("norm", [euclidean(2), euclidean(2, [[2.0, 0.5], [0.5, 1.0]]), weighted_lp(2, 2.0, [1.0, 2.0])])
    def test_biduality_through_tables(self, norm):
        dual = dual_table_norm(norm, nodes=1024)
        bidual = dual_table_norm(dual, nodes=512)
        vs = np.random.default_rng(4).standard_normal((100, 2))
        np.testing.assert_allclose(bidual.evaluate(vs), norm.evaluate(vs), rtol=1e-4)

    def test_closed_form_duals(self):
        assert closed_form_dual(weighted_lp(2, "inf")).p == 1.0
        assert closed_form_dual(quartic_blend(2, 0.3)) is None


class TestParallelogram:
    def test_euclidean_zero(self):
        rng = np.random.default_rng(1)
        for v, w in rng.standard_normal((20, 2, 2)):
            assert abs(parallelogram_defect(euclidean(2), v, w)) < 1e-12 * max(1.0, float(v @ v + w @ w))

    def test_zero_partner(self):
        assert parallelogram_defect(get_norm("l4_2"), [0.3, 2.0], [0.0, 0.0]) == pytest.approx(0.0, abs=1e-12)

    def test_l4_axes(self):
        assert parallelogram_defect(weighted_lp(2, 4.0), [1.0, 0.0], [0.0, 1.0]) == pytest.approx(
            2.0 * math.sqrt(2.0) - 4.0, abs=1e-12)

    @pytest.mark.parametrize("name", BUILTIN)
    def test_characterizes_inner_products(self, name):
        norm = get_norm(name)
        assert is_inner_product(norm) == norm.is_inner_product_family

    def test_recovered_gram(self):
        gram = np.array([[2.0, 0.5], [0.5, 1.0]])
        np.testing.assert_allclose(recover_gram(euclidean(2, gram)), gram, atol=1e-12)


class TestEquivalence:
    def test_euclidean_is_one(self):
        assert equivalence_constant(euclidean(2)) == pytest.approx(1.0)

    def test_l1_is_sqrt_two(self):
        assert equivalence_constant(weighted_lp(2, 1.0)) == pytest.approx(math.sqrt(2.0), rel=1e-6)

    def test_degenerate_is_infinite(self):
        assert equivalence_constant(custom_table(profile="abs_cos")) == math.inf
