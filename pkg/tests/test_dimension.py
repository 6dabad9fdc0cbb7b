import numpy as np
import pytest
from hypothesis import given, strategies as st

from fractime._errors import ConfigError
from fractime.dimension import (assouad_characteristic, covering_table, dyadic_pairs, minkowski_estimate,
                                spectrum_characteristic)
from fractime.fracset import Cantor, Explicit, PowerSequence, covering_number


def test_minkowski_interval():
    rep = minkowski_estimate(Explicit.grid(0, 1, 2.0 ** -16), range(4, 11))
    assert abs(rep.slope - 1.0) <= 0.05


def test_minkowski_power_sequence():
    # box dimension of {n**-a} is 1/(1+a)
    rep = minkowski_estimate(PowerSequence.for_resolution(1.0, 2.0 ** -20), range(8, 19))
    assert abs(rep.slope - 0.5) <= 0.03


def test_minkowski_cantor_exact():
    rep = minkowski_estimate(Cantor(0.5, 12), range(4, 21, 2))
    assert rep.slope == pytest.approx(0.5, abs=1e-12)
    assert rep.residual < 1e-9


def test_assouad_single_point():
    rep = assouad_characteristic(Explicit([0.0]), 0.7, window_exps=[0, 2, 4])
    assert rep.sup_value == 1.0
    assert rep.argmax["delta"] == rep.argmax["window"]


def test_assouad_interval_alpha_one():
    rep = assouad_characteristic(Explicit.grid(0, 1, 2.0 ** -14), 1.0, window_exps=[0, 2, 4, 6])
    assert 1.0 <= rep.sup_value <= 2.0


def test_cantor_window_counts_by_self_similarity():
    # N(C ∩ I_{k'}, 2**-2k) = 2**(k-k') on a step-k' interval
    C = Cantor(0.5, 12)
    for kp in (0, 2, 5):
        s, e = Cantor(0.5, kp).intervals()
        for k in (kp + 1, kp + 4, 12):
            assert covering_number(C, 2.0 ** (-2 * k), window=(s[0], e[0])) == 2 ** (k - kp)


def test_cantor_sup_bounded_at_half_and_growing_below():
    half, low = [], []
    for k in (4, 6, 8, 10, 12):
        plan = dict(window_exps=list(range(0, 2 * k + 1, 2)), delta_exps=list(range(0, 2 * k + 1, 2)))
        half.append(assouad_characteristic(Cantor(0.5, k), 0.5, **plan).sup_value)
        low.append(assouad_characteristic(Cantor(0.5, k), 0.4, **plan).sup_value)
    assert all(1.0 <= v <= 16.0 for v in half)
    assert all(b >= a for a, b in zip(low, low[1:]))
    # frozen sampled values: the last step gains 2**(0.2*1.4)
    assert low[-1] == pytest.approx(2.6390158215457875, rel=1e-12)
    assert low[-1] > 2 * low[0]


def test_spectrum_single_point():
    assert spectrum_characteristic(Explicit([0.0]), 0.3, 0.5, [0, 1, 2, 3]).sup_value == 1.0


@pytest.mark.parametrize("theta,alpha", [(0.6, 1.0), (0.2, 0.7)])
def test_spectrum_power_sequence_bounded(theta, alpha):
    vals = []
    for top in (2, 3, 4):
        P = PowerSequence.for_resolution(1.0, 2.0 ** -(top / theta))
        vals.append(spectrum_characteristic(P, alpha, theta, list(range(top + 1))).sup_value)
    assert max(vals) / min(vals) < 1 + 1e-9
    assert max(vals) < 2


def test_spectrum_power_sequence_grows_below_spectrum_value():
    # spectrum value 1/((1+a)(1-theta)) = 0.625 at a=1, theta=0.2
    vals = []
    for top in (2, 3, 4):
        P = PowerSequence.for_resolution(1.0, 2.0 ** -(top / 0.2))
        vals.append(spectrum_characteristic(P, 0.55, 0.2, list(range(top + 1))).sup_value)
    assert vals[0] < vals[1] < vals[2]
    assert vals == pytest.approx([2.653, 3.392, 4.238], abs=2e-3)


def test_spectrum_theta_range():
    with pytest.raises(ConfigError):
        spectrum_characteristic(Explicit([0.0]), 0.5, 1.0, [0, 1])


def test_dyadic_pairs_order():
    assert dyadic_pairs([0, 1], [1, 2]) == [(1.0, 0.5), (1.0, 0.25), (0.5, 0.5), (0.5, 0.25)]


@given(st.lists(st.floats(0, 1), min_size=1, max_size=25), st.floats(0.1, 1.0), st.floats(0.1, 1.0))
def test_sup_monotone_in_alpha(points, a1, a2):
    # (delta/|I|)**alpha decreases in alpha since delta <= |I|
    E = Explicit(points, resolution=2.0 ** -8)
    table = covering_table(E, dyadic_pairs([0, 2, 4], [0, 2, 4, 6, 8]))
    lo, hi = sorted([a1, a2])
    assert (assouad_characteristic(E, hi, table=table).sup_value
            <= assouad_characteristic(E, lo, table=table).sup_value + 1e-12)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=25))
def test_sup_at_least_one(points):
    E = Explicit(points, resolution=2.0 ** -6)
    assert assouad_characteristic(E, 0.5, window_exps=[0, 2, 4, 6]).sup_value >= 1.0
