import numpy as np
import pytest

from fractime._errors import ConfigError
from fractime.exponents import inhom_exponents
from fractime.fracmeasure import measure_for_band
from fractime.inhom import impulse_slices, inhom_apply, inhom_bandform, inhom_experiment
from fractime.mixednorm import TimeSlices
from fractime.spectral import GridFunction, gaussian, propagate
from fractime.strichartz_hom import band_grid

SIGMA0 = inhom_exponents(1, 2, "1/2", 4, 4, 4, 4)


def _slices(times, weights, rng, N=64, L=4.0):
    v = rng.standard_normal((len(times), N)) + 1j * rng.standard_normal((len(times), N))
    return TimeSlices(times, v, 1, L, N, weights)


def test_single_atom_is_propagation():
    F = _slices([0.3], [0.5], np.random.default_rng(0))
    out = inhom_apply(F, 2.0, eval_times=[1.1])
    expect = 0.5 * propagate(GridFunction(1, 4.0, 64, F.values[0]), 2.0, 0.8, check_band=False).values
    assert np.allclose(out.values[0], expect, atol=1e-12)


def test_retarded_before_atoms_is_zero():
    F = _slices([0.3, 0.6], [0.5, 0.5], np.random.default_rng(1))
    assert np.all(inhom_apply(F, 2.0, retarded=True, eval_times=[0.1]).values == 0)


def test_two_atom_triangle_bound():
    f = gaussian(1, 8.0, 128)
    v = np.stack([f.values / f.norm()] * 2)
    F = TimeSlices([0.2, 0.7], v, 1, 8.0, 128, [0.3, 0.6])
    out = inhom_apply(F, 2.0, eval_times=[0.0, 0.5, 1.0])
    for i in range(3):
        assert GridFunction(1, 8.0, 128, out.values[i]).norm() <= 0.9 + 1e-12


def test_bandform_empty_and_diagonal():
    j = 4
    _, L, N = band_grid(j)
    mu = measure_for_band("cantor", 0.5, 2.0, j)
    F = impulse_slices(np.random.default_rng(2), mu, j, 2.0, 1, L, N)
    assert inhom_bandform(F, F, 40, j, SIGMA0).empty
    one = TimeSlices(F.times[:1], F.values[:1] + 1.0, 1, L, N, F.weights[:1])
    b = inhom_bandform(one, one, 0, j, SIGMA0)
    assert b.value.real >= 0 and abs(b.value.imag) <= 1e-12 * abs(b.value)


def test_bandform_ratio_stable():
    per_j = []
    for j in range(4, 8):
        _, L, N = band_grid(j)
        mu = measure_for_band("cantor", 0.5, 2.0, j)
        F = impulse_slices(np.random.default_rng([0, j]), mu, j, 2.0, 1, L, N)
        per_j.append(max(inhom_bandform(F, F, k, j, SIGMA0).ratio for k in range(7)))
    assert max(per_j) <= 1.0 and max(per_j) / min(per_j) <= 2.0


def test_bandform_region_check():
    e = inhom_exponents(1, 2, "1/2", 2, "inf", 4, 4)
    j = 4
    _, L, N = band_grid(j)
    mu = measure_for_band("cantor", 0.5, 2.0, j)
    F = impulse_slices(np.random.default_rng(0), mu, j, 2.0, 1, L, N)
    with pytest.raises(ConfigError):
        inhom_bandform(F, F, 0, j, e)


def test_experiment_hypothesis_guard_names_conditions():
    with pytest.raises(ConfigError, match="alpha < d/gamma"):
        inhom_experiment(SIGMA0, [4, 5, 6, 7])


def test_gamma_two_sigma_zero_forces_lambda_zero():
    assert SIGMA0.sigma == 0 and SIGMA0.lam == 0


def test_diagonal_case_flat():
    e = inhom_exponents(1, 2, "1/2", 2, 2, "inf", "inf")
    assert e.sigma == 0
    rep = inhom_experiment(e, [4, 5, 6, 7], trials=4, seed=0, require_hypotheses=False)
    assert rep.slope <= 0.1
