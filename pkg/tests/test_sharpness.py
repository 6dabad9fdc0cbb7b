import math

import numpy as np
import pytest
from scipy.integrate import quad

from fractime._errors import ConfigError
from fractime.exponents import ExponentConfig
from fractime.sharpness import (GAP, TUBE_C, necessity_conad, necessity_conreg, necessity_measure,
                                necessity_smoothing, packet_field, passes, tube_constant)
from fractime.spectral import propagate, psi, spectral_mass, wave_packet

CFG44 = ExponentConfig(1, 2, "1/2", 4, 4, "-1/4")
CFG24 = ExponentConfig(1, 2, "1/2", 2, 4, "-1/4")


def test_pass_rule():
    assert passes(0.125 * 1.29, 0.125) and not passes(0.3, 0.125)
    assert passes(0.049, 0.0) and not passes(-0.06, 0.0)


def test_constants_recorded():
    assert TUBE_C == 1 / 8 and GAP == 8


def test_packet_field_matches_grid_propagation():
    f = wave_packet(5, 2, 2.0, t0=0.25)
    g = propagate(f, 2.0, 0.3, check_band=False)
    idx = np.array([0, 17, f.N // 2, f.N - 3])
    vals = packet_field(f, 2.0, np.full(idx.size, 0.3), f.x[idx][:, None])
    assert np.allclose(vals, g.values[idx], atol=1e-10 * np.abs(g.values).max())


def test_refocusing_peak_is_spectral_mass():
    f = wave_packet(6, 3, 2.0, t0=0.25)
    peak = abs(packet_field(f, 2.0, [0.25], np.zeros((1, 1)))[0])
    assert peak == pytest.approx(spectral_mass(f), rel=1e-12)


@pytest.mark.parametrize("j,m", [(6, 2), (7, 4), (8, 6)])
def test_tube_constant_and_scaled_peak(j, m):
    rep = tube_constant(j, m, 2.0)
    assert rep["constant"] >= 0.1
    # peak 2**(j - m/2) (2 pi)**-1 int psi; int psi over the line is 3/2
    mass = quad(lambda r: float(psi(abs(r))), -2, 2, points=[-1, -0.5, 0.5, 1], limit=200)[0]
    assert mass == pytest.approx(1.5, rel=1e-9)
    assert rep["peak_scaled"] == pytest.approx(mass / (2 * math.pi), rel=1e-6)


def test_tube_rotation_invariance_d2():
    a = tube_constant(4, 2, 2.0, d=2, xi0=[1.0, 0.0])
    b = tube_constant(4, 2, 2.0, d=2, xi0=[0.0, 1.0])
    c = tube_constant(4, 2, 2.0, d=2, xi0=[2 ** -0.5, 2 ** -0.5])
    assert a["constant"] == pytest.approx(b["constant"], rel=1e-9)
    assert a["constant"] == pytest.approx(c["constant"], rel=1e-4)
    assert a["constant"] >= 0.1


def test_conreg_at_threshold_flat():
    rep = necessity_conreg(CFG44, range(4, 9))
    assert rep.predicted == 0.0 and rep.passed
    assert abs(rep.measured) <= 0.01


def test_conreg_below_threshold_grows():
    rep = necessity_conreg(CFG44.replace(s="-9/20"), range(4, 9))
    assert rep.predicted == pytest.approx(0.2)
    assert rep.passed and rep.measured == pytest.approx(0.2, abs=0.02)


def test_conreg_measure_form():
    rep = necessity_conreg(CFG44.replace(s=0), range(4, 9), measure=True)
    assert rep.predicted == 0.0 and abs(rep.measured) <= 0.01
    rep = necessity_conreg(CFG44.replace(s="-1/5"), range(4, 9), measure=True)
    assert rep.measured == pytest.approx(0.2, abs=0.02)


def test_conad_guard():
    with pytest.raises(ConfigError, match=r"must be >= m \+ 8"):
        necessity_conad(CFG24, 6, [2, 4, 6])


def test_conad_sensitivity_and_window_mass():
    rep = necessity_conad(CFG24, 10, [6, 8, 10, 12])
    assert set(rep.meta["sensitivity"]) == {"gap+4", "gap+12"}
    assert rep.meta["min_length_ratio"] > 0.25
    assert rep.predicted == pytest.approx(1 / 8)


def test_measure_form_mass_ratio():
    rep = necessity_measure(CFG24.replace(s=0), 10, [6, 8, 10, 12])
    assert rep.meta["min_mass_ratio"] >= 0.2
    assert rep.passed


def test_smoothing_sign_flip():
    js = [6, 8, 10, 12, 14]
    at = necessity_smoothing(2.0, js, -0.25)
    below = necessity_smoothing(2.0, js, -0.35)
    above = necessity_smoothing(2.0, js, -0.15)
    assert at.passed and abs(at.measured) <= 0.05
    assert below.measured >= 0.05 and below.passed
    assert above.measured < 0
    assert at.meta["low_growth"] > 0.25


def test_smoothing_gamma_guard():
    with pytest.raises(ConfigError):
        necessity_smoothing(1.0, [4, 6, 8], -0.25)
