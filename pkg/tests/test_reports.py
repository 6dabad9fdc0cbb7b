import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fractime._errors import InsufficientDataError
from fractime.reports import RatioReport, RatioRow, config_hash, dumps, fit_slope, write_csv


def test_fit_slope_exact_line():
    fit = fit_slope([1, 2, 3, 4], [3, 5, 7, 9])
    assert fit.slope == pytest.approx(2) and fit.intercept == pytest.approx(1) and fit.residual < 1e-12


def test_fit_slope_needs_points():
    with pytest.raises(InsufficientDataError):
        fit_slope([1, 2], [1, 2])


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=10), st.floats(-3, 3))
def test_slope_shift_invariance(ys, c):
    xs = np.arange(len(ys), dtype=float)
    a = fit_slope(xs, ys).slope
    b = fit_slope(xs, np.asarray(ys) + c).slope
    assert a == pytest.approx(b, abs=1e-9)


def test_ratio_report_slope_in_log2():
    rows = [RatioRow(j, 2.0 ** (0.5 * j), 1.0, 1.0, 0) for j in range(4, 8)]
    rep = RatioReport.build("x", {}, rows)
    assert rep.slope == pytest.approx(0.5) and rep.constant == pytest.approx(2.0 ** 3.5)


def test_dumps_stable_and_hash():
    a = {"b": 1, "a": [1.5, float("inf")]}
    assert dumps(a) == dumps(dict(reversed(list(a.items()))))
    assert config_hash(a) == config_hash({"a": [1.5, float("inf")], "b": 1})
    json.loads(dumps({"x": np.float64(1.0), "y": np.arange(3)}))


def test_csv_crlf(tmp_path):
    write_csv(tmp_path / "t.csv", ["a", "b"], [[1, "x,y"], [2.5, 'q"']])
    raw = (tmp_path / "t.csv").read_bytes()
    assert raw == b'a,b\r\n1,"x,y"\r\n2.5,"q"""\r\n'
