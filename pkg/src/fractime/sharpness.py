"""Counterexample packets and the lower bounds they force.

Each runner evaluates a packet that refocuses at ``(x, t) = (0, t0)`` and
measures its space-time norm over a time window
``|t - t0| <= TUBE_C * 2**(w)`` (``w`` depends on the runner), which
lower-bounds the norm over the whole time domain.  The log2 slope of the
ratio to ``||f||_{H^s}`` is compared with the exponent predicted by the
scaling of the packet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._errors import ConfigError
from .exponents import ExponentConfig, recip, s_gamma, s_gamma_alpha
from .fracmeasure import AtomicMeasure, ball_mass, cantor_measure
from .fracset import Cantor, FractalSet, Neighborhood, neighborhood
from .mixednorm import neighborhood_nodes
from .reports import RatioReport, RatioRow
from .spectral import abs_xi, band_multiplier, freq_axis, wave_packet
from .strichartz_hom import _sobolev_from_spectrum, space_time_norms

__all__ = [
    "TUBE_C",
    "GAP",
    "NecessityReport",
    "passes",
    "packet_field",
    "tube_constant",
    "necessity_conreg",
    "necessity_conad",
    "necessity_measure",
    "necessity_smoothing",
]

TUBE_C = 0.125
GAP = 8


def passes(measured: float, predicted: float) -> bool:
    """``|measured - predicted| <= 0.3 |predicted| + 0.05``."""
    return abs(measured - predicted) <= 0.3 * abs(predicted) + 0.05


@dataclass(frozen=True)
class NecessityReport:
    """Measured slope of a packet family against the predicted exponent."""

    name: str
    predicted: float
    report: RatioReport
    meta: dict = field(default_factory=dict)

    @property
    def measured(self) -> float:
        return self.report.slope

    @property
    def passed(self) -> bool:
        return passes(self.measured, self.predicted)

    def to_json(self) -> dict:
        return {"name": self.name, "predicted": self.predicted, "measured": self.measured,
                "passed": self.passed, "report": self.report.to_json(), "meta": self.meta}


def _default_t0(alpha):
    # right endpoint of the first step-1 interval: an atom and a point of E
    return 2.0 ** (-1.0 / alpha)


def _velocity(gamma, j, xi0):
    # stationary point of x.xi + t |xi|^gamma at xi = 2^j xi0
    return -gamma * 2.0 ** ((gamma - 1) * j) * np.asarray(xi0, dtype=float)


def packet_field(f, gamma: float, t, x) -> np.ndarray:
    """``U_t f`` at off-grid points by direct evaluation of the Fourier sum.

    Parameters
    ----------
    f : GridFunction
    t : array_like, shape (n,)
    x : array_like, shape (n, d)
    """
    d, L, N = f.d, f.L, f.N
    fhat = f.spectrum().reshape(-1)
    supp = np.flatnonzero(np.abs(fhat) > 1e-300)
    ax = freq_axis(L, N)
    if d == 1:
        xis = ax[:, None]
    else:
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        xis = np.stack([X.reshape(-1), Y.reshape(-1)], axis=1)
    xis = xis[supp]
    sym = abs_xi(d, L, N).reshape(-1)[supp] ** gamma
    c = fhat[supp] * (1.0 / (2.0 * L)) ** d
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.asarray(x, dtype=float).reshape(t.size, d)
    out = np.empty(t.size, dtype=complex)
    for i in range(0, t.size, 64):
        ph = x[i:i + 64] @ xis.T + np.multiply.outer(t[i:i + 64], sym)
        out[i:i + 64] = np.exp(1j * ph) @ c
    return out


def tube_constant(j: int, m: int, gamma: float, t0: float = 0.25, d: int = 1, xi0=None,
                  c: float = TUBE_C, samples: int = 9) -> dict:
    """Minimum of ``|U_t f|`` over the tube, relative to ``|U_t0 f(0)|``.

    The tube is ``|t - t0| <= c 2**(m - gamma j)``,
    ``|x - v (t - t0)| <= c 2**(m/2 - j)`` with ``v = -gamma 2**((gamma-1) j) xi0``.
    Also returns ``2**(-dj + dm/2) |U_t0 f(0)|``, the refocused peak in the
    units of the lower bound.
    """
    xi0 = np.eye(d)[0] if xi0 is None else np.asarray(xi0, dtype=float)
    f = wave_packet(j, m, gamma, t0=t0, xi0=xi0, d=d)
    v = _velocity(gamma, j, xi0)
    ts = t0 + c * 2.0 ** (m - gamma * j) * np.linspace(-1, 1, samples)
    offs = c * 2.0 ** (m / 2 - j) * np.linspace(-1, 1, samples)
    if d == 1:
        grid = [(t, np.array([v[0] * (t - t0) + o])) for t in ts for o in offs]
    else:
        grid = [(t, v * (t - t0) + np.array([a, b])) for t in ts for a in offs for b in offs
                if a * a + b * b <= offs[-1] ** 2 * (1 + 1e-12)]
    tt = np.array([g[0] for g in grid])
    xx = np.array([g[1] for g in grid])
    vals = np.abs(packet_field(f, gamma, tt, xx))
    peak = float(abs(packet_field(f, gamma, [t0], np.zeros((1, d)))[0]))
    return {"j": j, "m": m, "c": c, "constant": float(vals.min() / peak), "peak": peak,
            "peak_scaled": peak * 2.0 ** (-d * j + d * m / 2.0), "samples": int(vals.size)}


def _clip_nb(nb: Neighborhood, lo: float, hi: float) -> Neighborhood:
    s = np.maximum(nb.starts, lo)
    e = np.minimum(nb.ends, hi)
    keep = e > s
    return Neighborhood(s[keep], e[keep], nb.delta)


def _set_nodes(E: FractalSet, gamma: float, j: int, t0: float, radius: float, nodes: int):
    delta = 2.0 ** (-gamma * j)
    nb = _clip_nb(neighborhood(E, delta), t0 - radius, t0 + radius)
    if len(nb) == 0:
        raise ConfigError(f"t0 = {t0} is not within {delta:g} of the set")
    # resolve the window at least as finely as 2 delta / nodes
    return neighborhood_nodes(nb, min(delta, radius), nodes)


def _measure_nodes(mu: AtomicMeasure, t0: float, radius: float):
    keep = np.abs(mu.positions - t0) <= radius
    if not keep.any():
        raise ConfigError(f"no atoms within {radius:g} of t0 = {t0}")
    return mu.positions[keep], mu.weights[keep]


def _ratio_row(f, j_or_m, gamma, q, r, s, times, weights, extra, band_j):
    d, L, N = f.d, f.L, f.N
    fhat = f.spectrum()
    g = fhat * band_multiplier(d, L, N, band_j, "psi")
    num = float(space_time_norms(g[None], d, L, gamma, times, q, r, weights)[0])
    den = _sobolev_from_spectrum(fhat, d, L, s)
    return RatioRow(int(j_or_m), num / den, num, den, 0, dict(extra, nodes=int(len(times))))


def _check_t0(E, gamma, j, t0):
    delta = 2.0 ** (-gamma * j)
    lo, hi = 2.0 ** (-1 - gamma * j), 1 - 2.0 ** (-1 - gamma * j)
    if not lo <= t0 <= hi:
        raise ConfigError(f"t0 = {t0} outside [{lo:g}, {hi:g}]")
    pts = E.points()
    if np.min(np.abs(pts - t0)) >= delta:
        raise ConfigError(f"t0 = {t0} not in the {delta:g}-neighborhood of the set")


def necessity_conreg(cfg: ExponentConfig, js: Sequence[int], t0: float | None = None,
                     measure: bool = False, nodes: int = 8, c: float = TUBE_C) -> NecessityReport:
    """Full-shell packet ``psi(2**-j |xi|) exp(-i t0 |xi|**gamma)`` across ``j``.

    The numerator is the ``L^q(L^r)`` norm over ``|t - t0| <= c 2**(-gamma j)``
    intersected with ``E(2**(-gamma j))`` (Lebesgue measure), or with the
    Cantor measure when ``measure`` is set.  Predicted slope: ``s_gamma - s``,
    or ``s_{gamma alpha} - s`` for the measure.
    """
    d, gamma, alpha = cfg.d, float(cfg.gamma), float(cfg.alpha)
    q, r, s = float(cfg.q), float(cfg.r), float(cfg.s)
    t0 = _default_t0(alpha) if t0 is None else t0
    rows = []
    for j in js:
        radius = c * 2.0 ** (-gamma * j)
        f = wave_packet(j, 0, gamma, t0=t0, d=d)
        if measure:
            mu = cantor_measure(alpha, int(math.ceil(alpha * (gamma * j + 4))))
            times, weights = _measure_nodes(mu, t0, radius)
        else:
            E = Cantor(alpha, int(math.ceil(alpha * gamma * j)))
            _check_t0(E, gamma, j, t0)
            times, weights = _set_nodes(E, gamma, j, t0, radius, nodes)
        rows.append(_ratio_row(f, j, gamma, q, r, s, times, weights, {}, j))
    pred = float((s_gamma_alpha(cfg) if measure else s_gamma(cfg)) - cfg.s)
    config = {"exponents": cfg.to_json(), "j_range": [int(j) for j in js], "t0": t0,
              "measure": measure, "c": c}
    rep = RatioReport.build("necessity_conreg", config, rows, {"predicted": pred}, min_scales=3)
    return NecessityReport("conreg2" if measure else "conreg", pred, rep, {"c": c})


def _conad_rows(cfg, j, ms, t0, measure, nodes, c, xi0, guard=True):
    d, gamma, alpha = cfg.d, float(cfg.gamma), float(cfg.alpha)
    q, r, s = float(cfg.q), float(cfg.r), float(cfg.s)
    bad = [m for m in ms if gamma * j < m + GAP - 1e-12]
    if bad and guard:
        raise ConfigError(f"gamma j = {gamma * j:g} must be >= m + {GAP} for m in {bad}")
    rows = []
    if measure:
        mu = cantor_measure(alpha, int(math.ceil(alpha * (gamma * j + 4))))
    else:
        E = Cantor(alpha, int(math.ceil(alpha * gamma * j)))
        _check_t0(E, gamma, j, t0)
    for m in ms:
        radius = c * 2.0 ** (m - gamma * j)
        f = wave_packet(j, m, gamma, t0=t0, xi0=xi0, d=d)
        if measure:
            times, weights = _measure_nodes(mu, t0, radius)
            mass = ball_mass(mu, t0, radius)
            extra = {"mass": mass, "mass_ratio": mass / 2.0 ** (alpha * m - alpha * gamma * j)}
        else:
            times, weights = _set_nodes(E, gamma, j, t0, radius, nodes)
            extra = {"window_length": float(np.sum(weights)),
                     "length_ratio": float(np.sum(weights)) / 2.0 ** (alpha * m - gamma * j)}
        extra["j"] = int(j)
        rows.append(_ratio_row(f, m, gamma, q, r, s, times, weights, extra, j))
    return rows


def _m_slope_prediction(cfg):
    d = cfg.d
    return float(d * recip(cfg.r) / 2 + cfg.alpha * recip(cfg.q) - d / 4.0)


def _conad(name, cfg, j, ms, t0, measure, nodes, c, xi0, sensitivity):
    gamma = float(cfg.gamma)
    t0 = _default_t0(float(cfg.alpha)) if t0 is None else t0
    rows = _conad_rows(cfg, j, ms, t0, measure, nodes, c, xi0)
    pred = _m_slope_prediction(cfg)
    config = {"exponents": cfg.to_json(), "j": int(j), "m_range": [int(m) for m in ms], "t0": t0,
              "c": c, "gap": GAP}
    rep = RatioReport.build(name, config, rows, {"predicted": pred, "scale": "m"}, min_scales=3)
    sens = {}
    for extra_gap in sensitivity:
        jj = int(math.ceil((max(ms) + extra_gap) / gamma - 1e-12))
        # sensitivity runs probe gaps on both sides of the guard
        rr = _conad_rows(cfg, jj, ms, t0, measure, nodes, c, xi0, guard=False)
        sens[f"gap+{extra_gap}"] = {"j": jj, "slope": RatioReport.build(name, config, rr, min_scales=3).slope}
    mass_key = "mass_ratio" if measure else "length_ratio"
    meta = {"c": c, "sensitivity": sens, "min_" + mass_key: min(r.extra[mass_key] for r in rows)}
    return NecessityReport(name, pred, rep, meta)


def necessity_conad(cfg: ExponentConfig, j: int, ms: Sequence[int], t0: float | None = None,
                    nodes: int = 8, c: float = TUBE_C, xi0=None, sensitivity=(4, 12)) -> NecessityReport:
    """Cap packets of width ``2**(-m/2)`` at fixed ``j``: slope in ``m``.

    Time domain ``E(2**(-gamma j)) ∩ {|t - t0| <= c 2**(m - gamma j)}`` for
    the Cantor set ``E``; the predicted slope is
    ``d/(2r) + alpha/q - d/4``.  ``sensitivity`` lists extra gaps
    ``gamma j - max(m)`` at which the slope is re-measured.

    Raises
    ------
    ConfigError
        ``gamma j < m + 8`` for some ``m``.
    """
    return _conad("necessity_conad", cfg, j, ms, t0, False, nodes, c, xi0, sensitivity)


def necessity_measure(cfg: ExponentConfig, j: int, ms: Sequence[int], t0: float | None = None,
                      c: float = TUBE_C, xi0=None, sensitivity=(4, 12)) -> NecessityReport:
    """As :func:`necessity_conad` with the Cantor measure as time weight.

    Rows carry ``mass_ratio = mu(J) / 2**(alpha m - alpha gamma j)`` for the
    window ``J``.
    """
    return _conad("necessity_measure", cfg, j, ms, t0, True, 0, c, xi0, sensitivity)


def necessity_smoothing(gamma: float, js: Sequence[int], s: float, alpha: float = 0.5,
                        t0: float | None = None, c: float = TUBE_C, d: int = 1) -> NecessityReport:
    """Packet with cap width ``m = j`` in the local smoothing norm.

    Numerator ``||U_t f||_{L^2(dmu; L^2(B))}`` over atoms with
    ``|t - t0| <= c 2**((1-gamma) j)``; predicted slope
    ``alpha (1-gamma)/2 - s``.  The lower growth bound at ``t0`` is checked
    on dyadic radii and reported as ``low_growth``.
    """
    if not gamma > 1:
        raise ConfigError(f"gamma = {gamma} must exceed 1")
    t0 = _default_t0(alpha) if t0 is None else t0
    rows, lows = [], []
    for j in js:
        mu = cantor_measure(alpha, int(math.ceil(alpha * gamma * j)))
        radii = [2.0 ** -k for k in range(0, int(math.floor(-math.log2(mu.resolution))) + 1)]
        lows.append(min(ball_mass(mu, t0, rho) / rho ** alpha for rho in radii))
        radius = c * 2.0 ** ((1 - gamma) * j)
        times, weights = _measure_nodes(mu, t0, radius)
        f = wave_packet(j, j, gamma, t0=t0, d=d)
        g = f.spectrum() * band_multiplier(d, f.L, f.N, j, "psi")
        num = float(space_time_norms(g[None], d, f.L, gamma, times, 2.0, 2.0, weights, radius=1.0)[0])
        den = _sobolev_from_spectrum(f.spectrum(), d, f.L, s)
        rows.append(RatioRow(int(j), num / den, num, den, 0, {"nodes": int(times.size)}))
    pred = alpha * (1 - gamma) / 2.0 - s
    config = {"gamma": gamma, "alpha": alpha, "s": s, "d": d, "j_range": [int(j) for j in js],
              "t0": t0, "c": c}
    rep = RatioReport.build("necessity_smoothing", config, rows, {"predicted": pred}, min_scales=3)
    return NecessityReport("smoothing", pred, rep, {"c": c, "low_growth": min(lows)})
