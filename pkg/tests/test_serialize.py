import json

import numpy as np
import pytest

from moebius.serialize import csv_text, format_float, json_text, write_text


def test_float_round_trip():
    for x in (0.1, -1 / 3, 1e-300, 6.02214076e23, np.float64(2.0) ** -1074):
        assert float(format_float(x)) == x
    assert format_float(0.125) == "1.2500000000000000e-01"


@pytest.mark.parametrize("bad", [float("nan"), float("inf")])
def test_non_finite_rejected(bad):
    with pytest.raises(ValueError):
        format_float(bad)


def test_json_is_valid_and_stable():
    obj = {"b": [1.0, 2, True, None], "a": {"x": np.float64(0.5), "s": "txt"}}
    text = json_text(obj)
    assert json.loads(text) == {"b": [1.0, 2, True, None], "a": {"x": 0.5, "s": "txt"}}
    assert text == json_text(obj) and text.endswith("\n")


def test_csv_and_write(tmp_path):
    text = csv_text(("a", "b"), [[1, 0.5], [2, True]])
    assert text.splitlines()[1] == "1,5.0000000000000000e-01"
    path = write_text(tmp_path / "sub" / "t.csv", text)
    assert path.read_bytes() == text.encode()
