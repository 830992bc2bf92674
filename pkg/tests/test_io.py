import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from solcomp.field import ComplexField, FieldError, LatticeParams, ShapeField
from solcomp.io import append_jsonl, format_field, parse_field, read_field, write_csv, write_field


@given(st.lists(st.floats(0, 1e6, allow_subnormal=True), min_size=1, max_size=30),
       st.integers(-100, 100), st.sampled_from(["zero", "periodic"]))
def test_shape_round_trip_is_bit_exact(vals, lo, boundary):
    p = LatticeParams(h=0.1, lo=lo, hi=lo + len(vals) - 1, boundary=boundary)
    u = ShapeField(p, np.array(vals))
    back = parse_field(format_field(u))
    assert isinstance(back, ShapeField) and back.params == p
    assert back.values.tobytes() == u.values.tobytes()


def test_complex_round_trip(tmp_path):
    psi = ComplexField.from_values([0.1 + 0.2j, -1e-300j, 3.0])
    write_field(tmp_path / "psi.txt", psi)
    back = read_field(tmp_path / "psi.txt")
    assert isinstance(back, ComplexField)
    assert back.values.tobytes() == psi.values.tobytes()


def test_format_example():
    u = ShapeField(LatticeParams(h=1.0, lo=-1, hi=0), np.array([0.5, 0.0]))
    assert format_field(u) == "# h=1.0 lo=-1 hi=0 boundary=zero\n-1\t0.5\n0\t0.0\n"


@pytest.mark.parametrize("text", [
    "-1\t0.5\n",
    "# h=1.0 lo=0 hi=1 boundary=zero\n0\t0.5\n",
    "# h=1.0 lo=0 hi=1 boundary=zero\n0\t0.5\n2\t0.1\n",
    "# h=1.0 lo=0 hi=1 boundary=zero\n0\t0.5\n1\t0.1\t0.0\n",
    "# h=1.0 lo=0 boundary=zero\n0\t0.5\n",
])
def test_malformed_files(text):
    with pytest.raises(FieldError):
        parse_field(text)


def test_csv_cells(tmp_path):
    write_csv(tmp_path / "a" / "t.csv", ("x", "ok", "n", "s"),
              [(0.1, True, np.int64(3), None), (np.float64(1 / 3), np.False_, 4, "merge")])
    lines = (tmp_path / "a" / "t.csv").read_text().splitlines()
    assert lines == ["x,ok,n,s", "0.1,true,3,", "0.3333333333333333,false,4,merge"]


def test_jsonl_appends(tmp_path):
    append_jsonl(tmp_path / "r.jsonl", {"b": 1, "a": 2})
    append_jsonl(tmp_path / "r.jsonl", {"c": None})
    assert (tmp_path / "r.jsonl").read_text() == '{"a": 2, "b": 1}\n{"c": null}\n'
