import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fractime._errors import ResolutionError, SchemaError
from fractime.fracset import (AffineImage, Cantor, Explicit, PowerSequence, Union, cantor_endpoints,
                              covering_number, export_points_csv, neighborhood, read_points_csv,
                              separated_subset, set_from_json)


def brute_cover(points, delta):
    # an optimal cover can start each interval at a point of the set
    pts = sorted(points)
    for k in range(1, len(pts) + 1):
        for lefts in itertools.combinations(pts, k):
            if all(any(a <= p <= a + delta for a in lefts) for p in pts):
                return k
    return 0


def test_cantor_step_one_intervals():
    s, e = cantor_endpoints(0.5, 1).intervals()
    assert s.tolist() == [0.0, 0.75] and e.tolist() == [0.25, 1.0]


def test_cantor_step_zero_is_unit_interval():
    s, e = Cantor(0.5, 0).intervals()
    assert s.tolist() == [0.0] and e.tolist() == [1.0]


def test_cantor_step_three_by_recursion():
    # oracle: expand the recursion with exact fractions
    from fractions import Fraction
    ivs = [(Fraction(0), Fraction(1))]
    for _ in range(3):
        ivs = [c for a, b in ivs for c in ((a, a + (b - a) / 4), (b - (b - a) / 4, b))]
    s, e = Cantor(0.5, 3).intervals()
    assert len(s) == 8
    assert np.allclose(e - s, 2.0 ** -6, rtol=0, atol=1e-15)
    assert s[0] == 0.0 and e[0] == 1 / 64
    assert np.array_equal(s, [float(a) for a, _ in ivs])


@pytest.mark.parametrize("alpha,k", [(0.5, 4), (0.3, 5), (0.8, 7)])
def test_cantor_count_and_lengths(alpha, k):
    s, e = Cantor(alpha, k).intervals()
    assert len(s) == 2 ** k
    assert np.allclose(e - s, 2.0 ** (-k / alpha), rtol=1e-12)


def test_depth_guard():
    Cantor(0.5, 20)
    with pytest.raises(ResolutionError, match="maximum admissible depth"):
        Cantor(0.5, 21)


def test_covering_examples():
    assert covering_number(Explicit.grid(0, 1, 2.0 ** -10), 0.25) == 4
    assert covering_number(Explicit([0, 0.5, 1]), 0.3) == 3


@pytest.mark.parametrize("k", range(1, 7))
def test_cantor_covering_matches_brute_force(k):
    E = Cantor(0.5, k)
    assert covering_number(E, 2.0 ** (-2 * k)) == 2 ** k
    # brute force on the interval endpoints, which determine the cover here
    if k <= 3:
        s, e = E.intervals()
        assert brute_cover(np.concatenate([s, e]).tolist(), 2.0 ** (-2 * k)) == 2 ** k


def test_covering_resolution_guard():
    with pytest.raises(ResolutionError):
        covering_number(Cantor(0.5, 2), 2.0 ** -8)


@given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=8, unique=True),
       st.floats(0.01, 0.6))
def test_greedy_is_optimal(points, delta):
    assert covering_number(Explicit(points), delta) == brute_cover(points, delta)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(0.01, 0.5), st.floats(0.01, 0.5))
def test_covering_monotone_in_delta(points, d1, d2):
    E = Explicit(points)
    lo, hi = sorted([d1, d2])
    assert covering_number(E, hi) <= covering_number(E, lo)


def test_neighborhood_examples():
    nb = neighborhood(Explicit([0.0]), 1.0)
    assert nb.as_list() == [(-1.0, 1.0)] and nb.total_length == 2.0
    nb = neighborhood(Explicit([0.0, 0.5]), 0.3)
    assert len(nb) == 1 and np.allclose(nb.as_list(), [(-0.3, 0.8)])


def test_neighborhood_cantor_oracle():
    s, e = Cantor(0.5, 3).intervals()
    nb = neighborhood(Cantor(0.5, 3), 2.0 ** -7)
    assert len(nb) == 8
    assert np.allclose(nb.starts, s - 2.0 ** -7) and np.allclose(nb.ends, e + 2.0 ** -7)
    assert np.allclose(nb.ends - nb.starts, 2.0 ** -6 + 2.0 ** -6)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=40), st.floats(1e-3, 0.5))
def test_neighborhood_disjoint_and_covering(points, delta):
    nb = neighborhood(Explicit(points), delta)
    assert np.all(nb.starts[1:] >= nb.ends[:-1])
    assert np.all(nb.contains(points))


def test_separated_examples():
    assert separated_subset(Explicit([0, 0.1, 0.9]), 1, 0, spacing=0.5).points.tolist() == [0, 0.9]
    pts = separated_subset(Explicit.grid(0, 1, 2.0 ** -10), 1, 4).points
    assert np.allclose(pts, np.arange(17) / 16)
    S = separated_subset(Cantor(0.5, 6), 2, 6)
    assert len(S) == 2 ** 6


@given(st.lists(st.floats(0, 1), min_size=1, max_size=60), st.floats(1e-3, 0.3))
def test_separated_is_maximal(points, spacing):
    E = Explicit(points)
    S = separated_subset(E, 1, 0, spacing=spacing).points
    assert np.all(np.diff(S) >= spacing)
    # maximality: every representative is within spacing of a kept point
    dist = np.min(np.abs(E.points()[:, None] - S[None, :]), axis=1)
    assert np.all(dist < spacing)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=30))
def test_representatives_sorted_within_bounds(points):
    E = Explicit(points)
    p = E.points()
    lo, hi = E.bounds
    assert np.all(np.diff(p) > 0) and p[0] >= lo and p[-1] <= hi


def test_power_sequence_and_composites():
    P = PowerSequence(1.0, 10)
    assert np.allclose(P.points(), sorted(1.0 / np.arange(1, 11)))
    A = AffineImage(Cantor(0.5, 2), 0.5, 1.0)
    assert np.isclose(A.bounds[0], 1.0) and np.isclose(A.bounds[1], 1.5)
    U = Union([Explicit([0.0]), Explicit([2.0])])
    assert U.points().tolist() == [0.0, 2.0]


@pytest.mark.parametrize("doc", [
    {"kind": "cantor", "alpha": 0.5, "depth": 4},
    {"kind": "power", "a": 1.0, "count": 12},
    {"kind": "explicit", "points": [0.0, 0.25]},
    {"kind": "affine", "base": {"kind": "cantor", "alpha": 0.5, "depth": 2}, "scale": 2.0, "shift": 1.0},
])
def test_json_round_trip(doc):
    E = set_from_json(doc)
    F = set_from_json(E.to_json())
    assert np.array_equal(E.points(), F.points())


def test_set_from_json_errors():
    with pytest.raises(SchemaError):
        set_from_json({"kind": "sphere"})
    with pytest.raises(SchemaError):
        set_from_json({"kind": "cantor"})


def test_points_csv_round_trip(tmp_path):
    E = Cantor(0.5, 5)
    export_points_csv(E, tmp_path / "p.csv")
    assert np.array_equal(read_points_csv(tmp_path / "p.csv"), E.points())
    assert math.isclose(E.points()[-1], 1.0)
