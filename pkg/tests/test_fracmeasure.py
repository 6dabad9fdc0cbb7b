import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fractime._errors import ConfigError, ResolutionError
from fractime.fracmeasure import (AtomicMeasure, ball_mass, cantor_measure, growth_constant, integrate,
                                  lebesgue_proxy, measure_for_band)


def test_cantor_measure_examples():
    mu = cantor_measure(0.5, 1)
    assert mu.positions.tolist() == [0.25, 1.0] and mu.weights.tolist() == [0.5, 0.5]
    mu = cantor_measure(0.5, 0)
    assert mu.positions.tolist() == [1.0] and mu.weights.tolist() == [1.0]
    mu = cantor_measure(0.5, 3)
    assert len(mu) == 8 and np.all(mu.weights == 1 / 8)


def test_ball_mass_examples():
    assert ball_mass(lebesgue_proxy(2.0 ** -10), 0.5, 0.25) == pytest.approx(0.5, abs=2.0 ** -9)
    m = ball_mass(cantor_measure(0.5, 6), 1.0, 2.0 ** -4)
    assert 2.0 ** -4 <= m <= 1 and 0.25 / 4 <= m <= 4 * 0.25
    mu = cantor_measure(0.5, 4)
    assert ball_mass(mu, 0.5, mu.diameter + mu.resolution) == pytest.approx(mu.total_mass)


def test_ball_mass_resolution_guard():
    mu = cantor_measure(0.5, 4)
    with pytest.raises(ResolutionError):
        ball_mass(mu, 0.5, mu.resolution / 4)


def test_growth_constant_lebesgue():
    # sup of min(2 rho, 1) / rho is 2
    assert growth_constant(lebesgue_proxy(2.0 ** -12), 1.0).value == pytest.approx(2.0, rel=0.1)


def test_growth_constant_cantor():
    assert 1.0 <= growth_constant(cantor_measure(0.5, 10), 0.5).value <= 4.0
    vals = [growth_constant(cantor_measure(0.5, k), 0.6).value for k in (6, 8, 10)]
    assert vals[0] < vals[1] < vals[2]
    # enumeration oracle: ratio 2**(0.2 k') at rho = 2**(-2k') reaches 2**(0.2 k)
    assert vals[-1] == pytest.approx(4.0, rel=1e-9)


def test_integrate_examples():
    mu = cantor_measure(0.5, 1)
    assert integrate(mu, lambda t: 1.0) == 1.0
    assert integrate(mu, lambda t: t) == pytest.approx(5 / 8)


def test_integrate_scaling_of_ball_indicators():
    mu = cantor_measure(0.5, 10)
    lam, alpha = 2.0, 0.5
    worst = 0.0
    for c in mu.positions[::37]:
        for rho in (2.0 ** -4, 2.0 ** -6, 2.0 ** -8):
            h = lambda t: (np.abs(t - c) < rho).astype(float)
            left = integrate(mu, h)
            right = lam ** alpha * integrate(mu, lambda t: h(lam * t))
            if right > 0:
                worst = max(worst, left / right)
    assert worst <= 4


def test_measure_for_band_resolution():
    for j in range(3, 9):
        mu = measure_for_band("cantor", 0.5, 2.0, j)
        assert mu.resolution <= 2.0 ** (-2 * j) * (1 + 1e-12)
    with pytest.raises(ConfigError):
        measure_for_band("dirac", 0.5, 2.0, 4)


def test_atomic_measure_validation():
    with pytest.raises(ConfigError):
        AtomicMeasure([0.0, 0.0], [1.0, 1.0], 1.0, 0.0)
    with pytest.raises(ConfigError):
        AtomicMeasure([0.0, 1.0], [1.0, -1.0], 1.0, 0.0)


def test_csv_round_trip(tmp_path):
    mu = cantor_measure(0.5, 5)
    mu.write_csv(tmp_path / "m.csv")
    nu = AtomicMeasure.read_csv(tmp_path / "m.csv")
    assert np.array_equal(mu.positions, nu.positions) and np.array_equal(mu.weights, nu.weights)


@given(st.integers(0, 10), st.integers(0, 9))
def test_cantor_mass_one_and_ahlfors(k, m):
    mu = cantor_measure(0.5, k)
    assert math.isclose(mu.total_mass, 1.0, rel_tol=1e-12)
    rho = 2.0 ** -m
    if rho >= mu.resolution:
        masses = ball_mass(mu, mu.positions, rho)
        assert np.all(masses >= rho ** 0.5 / 4 - 1e-15) and np.all(masses <= 4 * rho ** 0.5)


@given(st.floats(0, 1), st.floats(0.01, 0.3), st.floats(0.01, 0.3))
def test_ball_mass_monotone(t, r1, r2):
    mu = cantor_measure(0.5, 6)
    lo, hi = sorted([r1, r2])
    assert ball_mass(mu, t, lo) <= ball_mass(mu, t, hi)
