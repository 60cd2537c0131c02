import json
import math

import numpy as np
import pytest

from core.errors import ConfigError, InputError, NumericError, StencilError
from core.serialization import format_value, to_jsonable, write_csv, write_json
from core.settings import load_registry, registry_entry


class TestFormatValue:
    @pytest.mark.parametrize("value,text", [
        (True, "true"),
        (np.bool_(False), "false"),
        (3, "3"),
        (np.int64(-2), "-2"),
        (0.1, "0.1"),
        (1.0 / 3.0, "0.333333333333"),
        (math.inf, "inf"),
        (-math.inf, "-inf"),
        (math.nan, "nan"),
        ("id7", "id7"),
    ])
    def test_cells(self, value, text):
        assert format_value(value) == text


class TestJson:
    def test_numpy_values(self):
        doc = to_jsonable({"a": np.arange(3), "b": np.float64(0.5), "c": (np.bool_(True), math.inf), 4: None})
        assert doc == {"a": [0, 1, 2], "b": 0.5, "c": [True, "inf"], "4": None}

    def test_write_then_read(self, tmp_path):
        path = write_json(str(tmp_path / "nested" / "doc.json"), {"x": np.array([1.5, 2.5])})
        with open(path) as f:
            assert json.load(f) == {"x": [1.5, 2.5]}
        assert [p.name for p in (tmp_path / "nested").iterdir()] == ["doc.json"]

    def test_failed_write_leaves_nothing(self, tmp_path):
        with pytest.raises(TypeError):
            write_json(str(tmp_path / "doc.json"), {"x": object()})
        assert list(tmp_path.iterdir()) == []


class TestCsv:
    def test_header_and_cells(self, tmp_path):
        path = write_csv(str(tmp_path / "rows.csv"), ["id", "value", "ok"], [["a", 0.25, True], ["b", 2, False]])
        with open(path) as f:
            assert f.read() == "id,value,ok\na,0.25,true\nb,2,false\n"


class TestRegistries:
    @pytest.mark.parametrize("name", ["norms", "manifolds", "functions"])
    def test_registries_are_versioned(self, name):
        registry = load_registry(name)
        assert registry["version"] == "1.0"
        assert registry["entries"]

    def test_missing_entry_names_the_key(self):
        with pytest.raises(ConfigError) as info:
            registry_entry("norms", "no_such_norm")
        assert info.value.key == "no_such_norm"

    def test_unknown_registry(self):
        with pytest.raises(ConfigError):
            load_registry("actors")


class TestErrors:
    def test_hierarchy(self):
        assert issubclass(ConfigError, InputError)
        assert issubclass(InputError, ValueError)
        assert issubclass(StencilError, NumericError)
        assert issubclass(NumericError, ArithmeticError)
