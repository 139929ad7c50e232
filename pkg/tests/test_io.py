import json
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from soapfilm import io


def test_dumps_is_valid_json_with_17_digits():
    obj = {"a": np.float64(0.1), "b": [1, 2.5, np.int64(3)], "c": np.array([1 / 3]),
           "d": True, "e": None, "f": float("inf")}
    text = io.dumps(obj)
    back = json.loads(text)
    assert back["a"] == 0.1 and back["c"] == [1 / 3] and back["f"] == "inf"
    assert "0.33333333333333331" in text


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), max_size=20))
def test_float_round_trip_property(xs):
    assert json.loads(io.dumps({"x": xs}))["x"] == xs


def test_atomic_write_replaces_whole_file(tmp_path):
    path = tmp_path / "out.json"
    io.write_json(path, {"v": 1})
    io.write_json(path, {"v": 2})
    assert json.loads(path.read_text()) == {"v": 2}
    assert os.listdir(tmp_path) == ["out.json"]


def test_failed_write_leaves_nothing(tmp_path):
    path = tmp_path / "out.json"
    with pytest.raises(TypeError):
        io.write_json(path, {"v": object()})
    assert not path.exists()

    class Boom:
        def __iter__(self):
            yield [1.0]
            raise RuntimeError("boom")

    with pytest.raises(RuntimeError):
        io.write_csv(tmp_path / "x.csv", Boom())
    assert os.listdir(tmp_path) == []


def test_csv_text():
    text = io.csv_text([["h", "u"], [0.1, np.float64(2 / 3)], [1, "n=4"]])
    assert text == "h,u\n0.10000000000000001,0.66666666666666663\n1,n=4\n"
