import csv
import json

import pytest

from cli import OUTPUT_FILES, config_from_dict, run
from core.errors import ConfigError


def write_config(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def read_outputs(out_dir, command):
    csv_name, json_name = OUTPUT_FILES[command]
    with open(out_dir / csv_name) as f:
        rows = list(csv.reader(f))
    with open(out_dir / json_name) as f:
        summary = json.load(f)
    return rows, summary


def invoke(tmp_path, command, doc, *extra):
    out_dir = tmp_path / "out"
    code = run([command, "--config", write_config(tmp_path, doc), "--out", str(out_dir), *extra])
    return code, out_dir


class TestValidateNorm:
    def test_euclidean_passes(self, tmp_path):
        code, out = invoke(tmp_path, "validate-norm", {"norm": "euclidean2", "params": {"samples": 500}})
        rows, summary = read_outputs(out, "validate-norm")
        assert code == 0
        assert rows == [["axiom", "residual", "vector"]]
        assert summary["passed"] is True
        assert summary["min_hessian_eigenvalue"] == pytest.approx(2.0, rel=1e-3)
        assert summary["norm_name"] == "euclidean2"

    def test_degenerate_norm_fails(self, tmp_path):
        code, out = invoke(tmp_path, "validate-norm", {"norm": "degenerate_abs_v1", "params": {"samples": 500}})
        rows, summary = read_outputs(out, "validate-norm")
        assert code == 1
        assert summary["passed"] is False
        assert "positive_definite" in {row[0] for row in rows[1:]}

    def test_missing_norm_name(self, tmp_path, capsys):
        code, out = invoke(tmp_path, "validate-norm", {"norm": "no_such_norm"})
        assert code == 2
        assert "no_such_norm" in capsys.readouterr().err
        assert not out.exists()


class TestSmooth:
    def test_zero_function(self, tmp_path):
        doc = {"manifold": "unit_square", "function": "zero", "params": {"n": 400, "seed": 3}}
        code, out = invoke(tmp_path, "smooth", doc)
        rows, summary = read_outputs(out, "smooth")
        assert code == 0
        assert rows[0] == ["index", "err_abs", "lipa_g", "lipf_ball", "bound_ok", "support_ok"]
        assert len(rows) == 401
        assert all(row[4] == "true" and row[5] == "true" for row in rows[1:])
        assert summary["summary"]["passed"] is True

    def test_zero_epsilon_is_a_usage_error(self, tmp_path, capsys):
        doc = {"manifold": "unit_square", "function": "cone_center", "params": {"epsilon": 0}}
        code, _ = invoke(tmp_path, "smooth", doc)
        assert code == 2
        assert "params.epsilon" in capsys.readouterr().err

    def test_needs_one_function(self):
        with pytest.raises(ConfigError) as info:
            config_from_dict({"command": "smooth", "manifold": "unit_square"})
        assert info.value.key == "function"


class TestCheckHilbert:
    def test_identical_functions(self, tmp_path):
        doc = {"manifold": "unit_square", "functions": ["linear_diag", "linear_diag"],
               "params": {"n": 150, "rungs": 1, "seed": 11}}
        code, out = invoke(tmp_path, "check-hilbert", doc)
        rows, summary = read_outputs(out, "check-hilbert")
        assert code == 0
        assert rows[0] == ["index", "weight", "W_f", "W_g", "W_sum", "W_diff", "defect"]
        assert summary["verdict"] == "hilbertian_within_tol"

    def test_l4_plane_is_not_hilbertian(self, tmp_path):
        doc = {"manifold": "unit_square", "norm": "l4_2", "functions": ["linear_x", "linear_y"],
               "params": {"n": 200, "rungs": 2, "seed": 13}}
        code, out = invoke(tmp_path, "check-hilbert", doc)
        _, summary = read_outputs(out, "check-hilbert")
        assert code == 1
        assert summary["verdict"] == "non_hilbertian"
        assert summary["sandwich"] == {"applicable": False}

    def test_three_atoms_are_inconclusive(self, tmp_path):
        atoms = [{"point": p, "mass": 1.0} for p in ([0.25, 0.25], [0.5, 0.5], [0.75, 0.25])]
        doc = {"manifold": "unit_square", "functions": ["linear_x", "linear_y"],
               "measure": {"density": "uniform", "density_mass": 0.0, "atoms": atoms},
               "params": {"n": 150, "rungs": 1}}
        code, out = invoke(tmp_path, "check-hilbert", doc)
        _, summary = read_outputs(out, "check-hilbert")
        assert code == 3
        assert summary["effective_support"] == 3

    def test_needs_two_functions(self, tmp_path):
        code, _ = invoke(tmp_path, "check-hilbert", {"manifold": "unit_square", "functions": ["linear_x"]})
        assert code == 2


class TestQuotient:
    def test_full_dual_space(self, tmp_path):
        doc = {"instances": [{"id": "full", "norm": "euclidean2", "basis": [[1.0, 0.0], [0.0, 1.0]],
                              "representative": [1.0, -3.0]}]}
        code, out = invoke(tmp_path, "quotient", doc)
        rows, summary = read_outputs(out, "quotient")
        assert code == 0
        assert rows == [["id", "class_norm", "lift_norm", "abstract_norm", "concrete_norm", "gap"],
                        ["full", "0", "0", "0", "0", "0"]]
        assert summary["passed"] is True

    def test_random_batch(self, tmp_path):
        code, out = invoke(tmp_path, "quotient", {"instances": {"random": {"count": 20, "seed": 2}}})
        rows, summary = read_outputs(out, "quotient")
        assert code == 0
        assert len(rows) == 21
        assert summary["max_gap"] <= 1e-6

    def test_instance_file_relative_to_config(self, tmp_path):
        (tmp_path / "instances.json").write_text(json.dumps(
            {"instances": [{"id": "l1", "norm": "l1_2", "basis": [[1.0, -1.0]], "representative": [3.0, 1.0]}]}))
        code, out = invoke(tmp_path, "quotient", {"instances": "instances.json"})
        rows, _ = read_outputs(out, "quotient")
        assert code == 0
        assert float(rows[1][1]) == pytest.approx(2.0, abs=1e-9)

    def test_malformed_instance_file(self, tmp_path):
        (tmp_path / "bad.json").write_text(json.dumps({"instances": [{"norm": "l1_2"}]}))
        code, out = invoke(tmp_path, "quotient", {"instances": "bad.json"})
        assert code == 2
        assert not out.exists()


class TestDistances:
    def test_seeded_pairs(self, tmp_path):
        doc = {"manifold": "unit_square", "params": {"n": 300, "pairs": 10, "seed": 1}}
        code, out = invoke(tmp_path, "distances", doc)
        rows, summary = read_outputs(out, "distances")
        assert code == 0
        assert rows[0] == ["src", "dst", "distance"]
        assert len(rows) == 11
        assert summary["unreachable"] == 0
        assert summary["analytic"]["median_relative_error"] <= 0.25

    def test_explicit_sources(self, tmp_path):
        doc = {"manifold": "unit_square", "params": {"n": 100, "sources": [0], "targets": [0, 1, 2]}}
        code, out = invoke(tmp_path, "distances", doc)
        rows, _ = read_outputs(out, "distances")
        assert code == 0
        assert rows[1] == ["0", "0", "0"]

    def test_bad_index(self, tmp_path):
        doc = {"manifold": "unit_square", "params": {"n": 100, "sources": [500]}}
        code, _ = invoke(tmp_path, "distances", doc)
        assert code == 2


class TestConfig:
    def test_command_mismatch(self, tmp_path, capsys):
        code, _ = invoke(tmp_path, "smooth", {"command": "quotient"})
        assert code == 2
        assert "quotient" in capsys.readouterr().err

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as info:
            config_from_dict({"command": "quotient", "tolerance": 1.0})
        assert info.value.key == "tolerance"

    def test_missing_config_file(self, tmp_path):
        assert run(["quotient", "--config", str(tmp_path / "missing.json")]) == 2

    def test_seed_flag_overrides_document(self, tmp_path):
        doc = {"manifold": "unit_square", "params": {"n": 100, "pairs": 5, "seed": 1}}
        path = write_config(tmp_path, doc)
        run(["distances", "--config", path, "--out", str(tmp_path / "a"), "--seed", "9"])
        run(["distances", "--config", path, "--out", str(tmp_path / "b")])
        _, summary = read_outputs(tmp_path / "a", "distances")
        assert summary["config"]["params"]["seed"] == 9
        assert (tmp_path / "a" / "distances.csv").read_bytes() != (tmp_path / "b" / "distances.csv").read_bytes()

    def test_repeat_runs_are_byte_identical(self, tmp_path):
        doc = {"instances": {"random": {"count": 5, "seed": 4}}}
        path = write_config(tmp_path, doc)
        run(["quotient", "--config", path, "--out", str(tmp_path / "a")])
        run(["quotient", "--config", path, "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "quotient_batch.csv").read_bytes() == \
            (tmp_path / "b" / "quotient_batch.csv").read_bytes()
