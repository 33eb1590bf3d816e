import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mnlab import export
from mnlab.core import ProblemParams, Symmetry
from mnlab.solvers import solve_symmetric


@pytest.fixture(scope="module")
def sol():
    return solve_symmetric(ProblemParams(-1.0, 3.0, 0.5))


class TestFormatting:
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_roundtrip(self, x):
        assert float(export.fmt(x)) == x
        assert float(export.dumps_json(x)) == x

    def test_scalars(self):
        assert export.fmt(True) == "true"
        assert export.fmt(np.int64(7)) == "7"
        assert export.fmt(Symmetry.SYMMETRIC) == "symmetric"
        assert export.fmt(0.1) == "0.10000000000000001"

    @pytest.mark.parametrize("x", [math.nan, math.inf, -math.inf])
    def test_nonfinite_json_null(self, x):
        assert json.loads(export.dumps_json({"a": x, "b": [1.0, x]})) == {"a": None, "b": [1.0, None]}

    def test_nested_json_is_valid(self):
        obj = {"k": [{"x": 1, "y": [0.5, 2.0]}, "s"], "e": {}, "l": [], "arr": np.array([1.5])}
        assert json.loads(export.dumps_json(obj)) == {"k": [{"x": 1, "y": [0.5, 2.0]}, "s"], "e": {},
                                                      "l": [], "arr": [1.5]}

    def test_unserializable(self):
        with pytest.raises(TypeError):
            export.dumps_json({"a": object()})


class TestResiduals:
    def test_warn_flag(self):
        assert export.residual_block(1e-9, 1e-9, 1.0)["warn"] is False
        assert export.residual_block(2e-7, 1e-9, 1.0)["warn"] is True
        assert export.residual_block(1e-9, 2e-6, 1.0)["warn"] is True
        # thresholds scale with the sup norm
        assert export.residual_block(2e-7, 1e-9, 10.0)["warn"] is False

    def test_record(self, sol):
        rec = export.solution_record(sol, "t.csv")
        assert set(rec["residuals"]) == {"shoot", "fixed_point", "warn"}
        assert rec["residuals"]["warn"] is False
        assert rec["symmetry"] == "symmetric" and rec["samples-ref"] == "t.csv"

    def test_row_matches_columns(self, sol):
        row = export.solution_row(sol)
        assert len(row) == len(export.SOLUTION_COLUMNS)
        assert row[export.SOLUTION_COLUMNS.index("warn")] is False


class TestFiles:
    def test_csv_and_json_tables(self, tmp_path):
        rows = [[1.0, 0.1], [2.0, math.nan]]
        p = export.write_table(tmp_path / "t", ("a", "b"), rows, "csv")
        assert p.suffix == ".csv"
        got = list(csv.reader(p.open()))
        assert got == [["a", "b"], ["1", "0.10000000000000001"], ["2", "nan"]]
        q = export.write_table(tmp_path / "t", ("a", "b"), rows, "json", {"note": "x"})
        data = json.loads(q.read_text())
        assert data["records"] == [{"a": 1.0, "b": 0.1}, {"a": 2.0, "b": None}] and data["note"] == "x"

    def test_deterministic(self, tmp_path, sol):
        a = export.write_json(tmp_path / "a.json", export.solution_record(sol)).read_bytes()
        b = export.write_json(tmp_path / "b.json", export.solution_record(sol)).read_bytes()
        assert a == b

    def test_trajectory(self, tmp_path, sol):
        p = export.write_trajectory(tmp_path / "traj.csv", sol)
        rows = list(csv.reader(p.open()))
        assert rows[0] == ["x", "u", "v", "regime"]
        x = [float(r[0]) for r in rows[1:]]
        assert x[0] == 0.0 and x[-1] == 1.0 and x == sorted(x)
        assert {r[3] for r in rows[1:]} == {"nonlinear", "linear"}
