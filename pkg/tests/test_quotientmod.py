import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.errors import InputError, NumericError, PreconditionError
from minkowski import euclidean, get_norm, weighted_lp
from quotientmod import (
    CSV_HEADER,
    batch_summary,
    csv_rows,
    instance_from_dict,
    iota_embed,
    load_instances,
    make_instance,
    minimal_lift,
    project_P,
    random_instance,
    random_instances,
    run_batch,
)
from quotientmod.solvers import minimal_lift_solve, quotient_support, solve_subgradient


@pytest.fixture
def plane_l2_e3():
    return make_instance("e3", euclidean(3), [[0.0, 0.0, 1.0]], [1.0, 2.0, 3.0])


@pytest.fixture
def l1_antidiagonal():
    # V = R^2 with l1, so V* carries l-inf
    return make_instance("l1", get_norm("l1_2"), [[1.0, -1.0]], [3.0, 1.0])


class TestProjection:
    def test_trivial_quotient(self, rng):
        w = rng.standard_normal(3)
        inst = make_instance("k0", euclidean(3), [], w)
        element = project_P(inst, w)
        assert element.class_norm == pytest.approx(np.linalg.norm(w), rel=1e-12)
        assert np.array_equal(minimal_lift(inst, element), w)

    def test_orthogonal_projection(self, plane_l2_e3):
        element = project_P(plane_l2_e3, plane_l2_e3.representative)
        assert element.class_norm == pytest.approx(math.sqrt(5.0), abs=1e-9)
        assert minimal_lift(plane_l2_e3, element) == pytest.approx([1.0, 2.0, 0.0], abs=1e-9)
        assert element.method == "newton"
        assert element.gap <= 1e-9

    def test_linf_quotient(self, l1_antidiagonal):
        element = project_P(l1_antidiagonal, [3.0, 1.0])
        assert element.class_norm == pytest.approx(2.0, abs=1e-9)
        assert element.method == "linprog"
        assert abs(element.gap) <= 1e-9

    @pytest.mark.parametrize("a,b", [(3.0, 1.0), (-1.0, 4.0), (0.5, 0.5), (2.0, -2.0)])
    def test_linf_closed_form(self, l1_antidiagonal, a, b):
        element = project_P(l1_antidiagonal, [a, b])
        assert element.class_norm == pytest.approx(abs(a + b) / 2.0, abs=1e-9)

    def test_reprojection(self, plane_l2_e3, l1_antidiagonal):
        for inst in (plane_l2_e3, l1_antidiagonal):
            element = project_P(inst, inst.representative)
            again = project_P(inst, minimal_lift(inst, element))
            assert again.class_norm == pytest.approx(element.class_norm, abs=1e-9)

    def test_full_dual_space(self):
        inst = make_instance("full", euclidean(2), np.eye(2), [1.0, -3.0])
        element = project_P(inst, inst.representative)
        assert element.class_norm == 0.0
        assert np.all(minimal_lift(inst, element) == 0.0)
        result = iota_embed(inst, np.zeros(2))
        assert result.abstract_norm == 0.0 and result.concrete_norm == 0.0

    def test_lift_from_other_instance(self, plane_l2_e3, l1_antidiagonal):
        element = project_P(plane_l2_e3, plane_l2_e3.representative)
        with pytest.raises(PreconditionError):
            minimal_lift(l1_antidiagonal, element)

    def test_dimension_mismatch(self, plane_l2_e3):
        with pytest.raises(InputError):
            project_P(plane_l2_e3, [1.0, 2.0])


class TestEmbedding:
    def test_self_duality(self):
        inst = make_instance("k0", euclidean(2), [], [1.0, 0.0])
        result = iota_embed(inst, [3.0, 4.0])
        assert result.abstract_norm == pytest.approx(5.0, abs=1e-9)
        assert result.concrete_norm == pytest.approx(5.0, abs=1e-12)

    def test_orthogonal_decomposition(self, plane_l2_e3):
        result = iota_embed(plane_l2_e3, [1.0, 2.0, 0.0])
        assert result.abstract_norm == pytest.approx(math.sqrt(5.0), abs=1e-9)
        assert result.concrete_norm == pytest.approx(math.sqrt(5.0), abs=1e-12)
        assert np.array_equal(result.embedded, [1.0, 2.0, 0.0])

    def test_l1_linf_pair(self, l1_antidiagonal):
        result = iota_embed(l1_antidiagonal, [1.0, 1.0])
        assert result.concrete_norm == pytest.approx(2.0, abs=1e-12)
        assert result.abstract_norm == pytest.approx(2.0, abs=1e-9)

    def test_off_annihilator(self, l1_antidiagonal):
        with pytest.raises(PreconditionError) as info:
            iota_embed(l1_antidiagonal, [1.0, 0.0])
        assert info.value.witness == [1.0]

    def test_homogeneity(self):
        inst = random_instance(7, n=3, k=1, family="quartic_blend")
        base = iota_embed(inst, inst.vector).abstract_norm
        scaled = iota_embed(inst, 3.0 * inst.vector).abstract_norm
        assert scaled == pytest.approx(3.0 * base, rel=1e-9)

    def test_doubled_class_norm_halves_the_abstract_norm(self, monkeypatch):
        def doubled(inst, w, method="auto"):
            result = minimal_lift_solve(inst, w, method)
            return replace(result, value=2.0 * result.value, lower_bound=2.0 * result.lower_bound,
                           certificate=2.0 * result.certificate)

        monkeypatch.setattr("quotientmod.solvers.minimal_lift_solve", doubled)
        rows, errors = run_batch(random_instances(20, seed=0))
        assert errors == []
        for row in rows:
            assert row["abstract_norm"] == pytest.approx(0.5 * row["concrete_norm"], rel=1e-5)
        summary = batch_summary(rows, errors)
        assert summary["max_isometry_defect"] > 0.1
        assert not summary["passed"]

    def test_lift_solver_failure_propagates(self, monkeypatch):
        def failing(inst, w, method="auto"):
            raise NumericError("lift solver unavailable", diagnostics={"id": inst.id})

        monkeypatch.setattr("quotientmod.solvers.minimal_lift_solve", failing)
        inst = random_instance(7, n=3, k=1, family="quartic_blend")
        with pytest.raises(NumericError):
            iota_embed(inst, inst.vector)
        rows, errors = run_batch(random_instances(5, seed=0))
        assert rows == []
        assert {e["error"] for e in errors} == {"NumericError"}


class TestSolvers:
    def test_subgradient_reaches_linf_optimum(self, l1_antidiagonal):
        result = solve_subgradient(l1_antidiagonal, np.array([3.0, 1.0]))
        assert result.value == pytest.approx(2.0, abs=1e-6)
        assert result.method == "subgradient"

    def test_subgradient_iteration_cap(self, l1_antidiagonal):
        with pytest.raises(NumericError) as info:
            solve_subgradient(l1_antidiagonal, np.array([3.0, 1.0]), max_iter=1)
        assert info.value.diagnostics["gap"] > 0

    def test_quartic_lift(self):
        inst = random_instance(3, n=4, k=2, family="quartic_blend")
        element = project_P(inst, inst.representative)
        assert element.method == "newton"
        assert element.class_norm <= inst.dual.value(inst.representative)
        assert abs(element.gap) <= 1e-8

    def test_support_by_cutting_planes(self):
        # V* / K carries the max norm of the first two coordinates
        inst = make_instance("l1", weighted_lp(3, 1.0), [[0.0, 0.0, 1.0]], [1.0, 1.0, 1.0])
        result = quotient_support(inst, [1.0, -2.0, 0.0])
        assert result.method == "cutting_planes"
        assert result.value == pytest.approx(3.0, abs=1e-7)
        assert result.residual <= 1e-8

    def test_support_by_bfgs(self, plane_l2_e3):
        result = quotient_support(plane_l2_e3, [3.0, 4.0, 0.0])
        assert result.method == "bfgs"
        assert result.value == pytest.approx(5.0, abs=1e-9)
        assert result.evaluations > 1

    def test_support_on_a_line(self, l1_antidiagonal):
        result = quotient_support(l1_antidiagonal, [-1.0, -1.0])
        assert result.method == "line"
        assert result.value == pytest.approx(2.0, abs=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_weighted_l3_lift(self, seed):
        rng = np.random.default_rng(seed)
        norm = weighted_lp(3, 3.0, rng.uniform(0.5, 2.0, 3))
        inst = make_instance("l3", norm, rng.standard_normal((1, 3)), rng.standard_normal(3))
        element = project_P(inst, inst.representative)
        assert element.class_norm <= inst.dual.value(inst.representative)
        assert abs(element.gap) <= 1e-6


class TestInstances:
    def test_random_instance_shape(self):
        for seed in range(20):
            inst = random_instance(seed)
            assert 2 <= inst.n <= 6
            assert 0 <= inst.k <= min(3, inst.n - 1)
            assert inst.annihilator_residual(inst.vector) <= 1e-10

    def test_degenerate_norm_rejected(self):
        with pytest.raises(InputError):
            make_instance("bad", get_norm("degenerate_abs_v1"), [], [1.0, 0.0])

    def test_dependent_basis(self):
        with pytest.raises(InputError):
            make_instance("dep", euclidean(3), [[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]], [1.0, 1.0, 1.0])

    def test_documents(self):
        inst = instance_from_dict({"id": "doc", "norm": "l1_2", "basis": [[1.0, -1.0]], "representative": [3.0, 1.0]})
        assert inst.norm_name == "l1_2"
        assert inst.vector == pytest.approx([2.0, 2.0])
        assert instance_from_dict(inst.to_dict()).to_dict() == inst.to_dict()

    @pytest.mark.parametrize("doc", [
        {"norm": "l1_2"},
        {"norm": "l1_2", "basis": [[1.0, 2.0, 3.0]], "representative": [1.0, 0.0]},
        {"norm": "no_such_norm", "representative": [1.0, 0.0]},
        {"norm": {"dim": 2}, "representative": [1.0, 0.0]},
        "not an instance",
    ])
    def test_malformed_documents(self, doc):
        with pytest.raises(InputError):
            load_instances([doc])

    def test_instance_file_shape(self):
        with pytest.raises(InputError):
            load_instances({"instances": "nope"})


class TestBatch:
    def test_random_batch(self):
        rows, errors = run_batch(random_instances(200, seed=0))
        summary = batch_summary(rows, errors)
        assert errors == []
        assert summary["instances"] == 200
        assert summary["contraction_violations"] == []
        assert summary["max_gap"] <= 1e-6
        assert summary["max_lift_defect"] <= 1e-8
        assert summary["max_isometry_defect"] <= 1e-6
        assert summary["passed"]

    def test_rows_follow_header(self, plane_l2_e3):
        rows, _ = run_batch([plane_l2_e3])
        table = csv_rows(rows)
        assert CSV_HEADER == ["id", "class_norm", "lift_norm", "abstract_norm", "concrete_norm", "gap"]
        assert table[0][0] == "e3"
        assert table[0][1] == pytest.approx(math.sqrt(5.0), abs=1e-9)

    def test_errors_are_collected(self, plane_l2_e3):
        off = make_instance("off", euclidean(3), [[0.0, 0.0, 1.0]], [1.0, 2.0, 3.0], vector=[0.0, 0.0, 1.0])
        rows, errors = run_batch([plane_l2_e3, off])
        assert [row["id"] for row in rows] == ["e3"]
        assert errors[0]["id"] == "off" and errors[0]["error"] == "PreconditionError"
        assert not batch_summary(rows, errors)["passed"]

    def test_deterministic(self):
        first, _ = run_batch(random_instances(10, seed=4))
        second, _ = run_batch(random_instances(10, seed=4))
        assert csv_rows(first) == csv_rows(second)
