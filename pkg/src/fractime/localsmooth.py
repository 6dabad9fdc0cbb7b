"""L**2 local smoothing over fractal time and the temporal localization kernel.

The experiments measure

    ||U_t P_j f||_{L^2(dmu; L^2(B))},   B = {|x| <= 1},

for band-limited impulses that refocus at a random point ``x0`` of
``[-1/2, 1/2]**d`` at a random atom ``t0``.  A band-``j`` wave travels
with speed at least ``gamma 2**((j-1)(gamma-1))``, so it has left ``B``
(up to non-stationary tails) once ``|t - t0|`` exceeds
``HORIZON / (gamma 2**((j-1)(gamma-1)))``; atoms beyond that horizon are
skipped and the grid is sized so that the retained evolution never
wraps around the torus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import j0 as bessel_j0

from ._errors import ConfigError, InsufficientDataError
from .dimension import SpectrumReport, spectrum_characteristic
from .fracmeasure import AtomicMeasure, measure_for_band
from .fracset import FractalSet, neighborhood
from .mixednorm import _window_mask, lr_norms, neighborhood_nodes
from .reports import RatioReport, RatioRow, fit_slope
from .spectral import abs_xi, chi, evolve_chunks, freq_axis, psi

__all__ = [
    "HORIZON",
    "KERNEL_C",
    "PhaseFamily",
    "Certificate",
    "smoothing_experiment",
    "smoothing_set_experiment",
    "smoothing_assembly",
    "AssemblyReport",
    "localization_kernel_check",
    "KernelDecayReport",
    "kernel_order",
    "omega",
    "omega_norm",
    "interval_count",
    "smoothing_grid",
]

HORIZON = 4.0
KERNEL_C = 8.0


# phases ----------------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    """Sampled constants of the phase conditions on one annulus.

    ``gradient`` is the range of ``|d_rho (Q(t) - Q(s))| / (|t - s| rho**(gamma-1))``;
    ``higher[b]`` bounds ``|d_rho**b (Q(t) - Q(s))| / (|t - s| rho**(gamma-b))``.
    """

    j: int
    gradient: tuple
    higher: dict

    @property
    def ok(self) -> bool:
        return self.gradient[0] > 0 and all(np.isfinite(v) for v in self.higher.values())

    def to_json(self) -> dict:
        return {"j": self.j, "gradient": list(self.gradient),
                "higher": {str(k): v for k, v in self.higher.items()}, "ok": self.ok}


def _falling(p, b):
    out = 1.0
    for i in range(b):
        out *= p - i
    return out


@dataclass(frozen=True)
class PhaseFamily:
    """Radial phases ``Q(xi, t) = t (|xi|**gamma + sum_i c_i |xi|**p_i)``.

    ``terms`` holds the perturbation pairs ``(c_i, p_i)``; the default
    family has none.  Linearity in ``t`` makes ``Q(t) - Q(s)`` equal to
    ``(t - s)`` times the radial symbol.
    """

    gamma: float
    terms: tuple = ()

    def __post_init__(self):
        if not self.gamma > 1:
            raise ConfigError(f"phase requires gamma > 1, got {self.gamma}")
        object.__setattr__(self, "terms", tuple((float(c), float(p)) for c, p in self.terms))

    def symbol(self, rho, order: int = 0):
        """``d_rho**order`` of the radial symbol at ``rho > 0``."""
        rho = np.asarray(rho)
        out = _falling(self.gamma, order) * rho ** (self.gamma - order)
        for c, p in self.terms:
            out = out + c * _falling(p, order) * rho ** (p - order)
        return out

    def Q(self, rho, t):
        return t * self.symbol(rho)

    def certificate(self, j: int, max_order: int = 3, samples: int = 513) -> Certificate:
        """Ratio constants on the annulus ``2**(j-1) <= rho <= 2**(j+1)``."""
        rho = np.geomspace(2.0 ** (j - 1), 2.0 ** (j + 1), samples)
        g = np.abs(self.symbol(rho, 1)) / rho ** (self.gamma - 1)
        higher = {b: float(np.max(np.abs(self.symbol(rho, b)) / rho ** (self.gamma - b)))
                  for b in range(2, max_order + 1)}
        return Certificate(int(j), (float(g.min()), float(g.max())), higher)

    def to_json(self) -> dict:
        return {"gamma": self.gamma, "terms": [list(t) for t in self.terms]}


# localization kernel ------------------------------------------------------------

def kernel_order(d: int, nu: float) -> float:
    """Integration-by-parts order ``max(2, d - 2 nu + 2)``."""
    return max(2.0, d - 2.0 * nu + 2.0)


def _radial_kernel(phase: PhaseFamily, j: int, d: int, z: np.ndarray, tau: float, nodes: int):
    # K(z, tau) = int exp(i(z.xi + tau Q(|xi|))) psi^2(2^-j |xi|) dxi, radially reduced
    rho = np.linspace(2.0 ** (j - 1), 2.0 ** (j + 1), nodes + 1)
    h = rho[1] - rho[0]
    w = psi(rho / 2.0 ** j) ** 2 * h
    # phase reduced mod 2 pi in extended precision to keep the quadrature floor near eps
    rl = rho.astype(np.longdouble)
    sym = rl ** np.longdouble(phase.gamma)
    for c, p in phase.terms:
        sym = sym + np.longdouble(c) * rl ** np.longdouble(p)
    ph = np.asarray(np.fmod(np.longdouble(tau) * sym, 2 * np.pi * np.longdouble(1)), dtype=float)
    e = np.exp(1j * ph) * w
    if d == 1:
        return 2.0 * (np.cos(np.outer(z, rho)) @ e)
    return 2.0 * np.pi * (bessel_j0(np.outer(z, rho)) @ (e * rho))


@dataclass(frozen=True)
class KernelDecayReport:
    j: int
    d: int
    L_order: float
    C: float
    K0: float
    gaps: tuple
    values: tuple
    fit_mask: tuple
    exponent: float
    worst_bound_ratio: float

    @property
    def ok(self) -> bool:
        return self.exponent >= self.L_order - 0.5

    def to_json(self) -> dict:
        return {"j": self.j, "d": self.d, "L_order": self.L_order, "C": self.C, "K0": self.K0,
                "gaps": list(self.gaps), "values": list(self.values), "fit_mask": list(self.fit_mask),
                "exponent": self.exponent, "worst_bound_ratio": self.worst_bound_ratio, "ok": self.ok}

    def csv_rows(self):
        # fitted line through the fitted points, in log space
        xs = np.log(1.0 + np.asarray(self.gaps))
        ys = np.log(np.maximum(np.asarray(self.values), 1e-300))
        m = np.asarray(self.fit_mask)
        b = float(np.mean(ys[m] + self.exponent * xs[m])) if m.any() else 0.0
        line = np.exp(b - self.exponent * xs)
        return ["gap", "abs_K", "fitted"], [[g, v, f] for g, v, f in zip(self.gaps, self.values, line)]


def localization_kernel_check(phase: PhaseFamily, j: int, L_order: float = 2.0, d: int = 1,
                              C: float = KERNEL_C, span: float = 2.0, steps: int = 24,
                              nodes: int = 1 << 16, z_samples: int = 81,
                              enforce: bool = True) -> KernelDecayReport:
    """Decay of ``sup_{|x - y| <= 2} |K(x, y, s, t)|`` in ``2**(gamma j) |t - s|``.

    Gaps run geometrically from ``C 2**((1-gamma) j)`` up to ``span`` times
    that value.  A gap enters the fit when the quadrature agrees with a
    half-resolution rerun to 5 percent and ``|K|`` exceeds ``50 eps K(0)``;
    the exponent is minus the least squares slope of ``log|K|`` against
    ``log(1 + 2**(gamma j) |t - s|)``.

    Raises
    ------
    InsufficientDataError
        Fewer than three gaps are resolved above the quadrature floor.
    ConfigError
        ``enforce`` is set and the exponent is below ``L_order - 0.5``.
    """
    if d not in (1, 2):
        raise ConfigError(f"kernel check supports d = 1, 2, got {d}")
    gamma = phase.gamma
    z = np.linspace(0.0, 2.0, z_samples)
    tau0 = C * 2.0 ** ((1 - gamma) * j)
    taus = tau0 * span ** (np.arange(steps + 1) / steps)
    K0 = float(abs(_radial_kernel(phase, j, d, np.zeros(1), 0.0, nodes)[0]))
    vals, mask = [], []
    for tau in taus:
        fine = float(np.abs(_radial_kernel(phase, j, d, z, tau, nodes)).max())
        coarse = float(np.abs(_radial_kernel(phase, j, d, z, tau, nodes // 2)).max())
        vals.append(fine)
        mask.append(fine > 50 * np.finfo(float).eps * K0 and abs(fine - coarse) <= 0.05 * fine)
    gaps = 2.0 ** (gamma * j) * taus
    mask = np.array(mask)
    if mask.sum() < 3:
        raise InsufficientDataError(
            f"only {int(mask.sum())} gaps resolved above the quadrature floor; range too small to fit"
        )
    fit = fit_slope(np.log(1.0 + gaps[mask]), np.log(np.asarray(vals)[mask]), min_points=3)
    bound = K0 * (1.0 + gaps) ** (-L_order)
    rep = KernelDecayReport(int(j), d, float(L_order), float(C), K0, tuple(float(g) for g in gaps),
                            tuple(vals), tuple(bool(m) for m in mask), float(-fit.slope),
                            float(np.max(np.asarray(vals) / bound)))
    if enforce and not rep.ok:
        raise ConfigError(f"fitted decay exponent {rep.exponent:.3f} below L_order - 0.5 = {L_order - 0.5}")
    return rep


# spatial windows -----------------------------------------------------------------

def omega(x):
    """Schwartz weight ``exp(1 - |x|**2)``, at least 1 on the unit ball."""
    return np.exp(1.0 - np.asarray(x) ** 2)


def omega_norm(values: np.ndarray, d: int, L: float) -> np.ndarray:
    """Per-slice ``||omega f||_2`` for slices stacked on the leading axis."""
    N = values.shape[-1]
    x = np.linspace(-L, L, N, endpoint=False)
    if d == 1:
        w = omega(x)
    else:
        X, Y = np.meshgrid(x, x, indexing="ij")
        w = np.exp(1.0 - X * X - Y * Y)
    return lr_norms(values * w, d, L, 2.0)


# experiments -------------------------------------------------------------------

def smoothing_grid(j: int, gamma: float, d: int = 1):
    """``(L, N)`` holding the retained evolution without wrap-around.

    The fastest band-``j`` speed times the horizon is ``HORIZON 4**(gamma-1)``;
    ``L = pi 2**p`` exceeds half of that plus the ball, and ``xi_max = 2**(j+1)`` covers the support of ``psi(2**-j |xi|)``.
    """
    reach = HORIZON * 4.0 ** (gamma - 1) + 2.0
    p = max(0, math.ceil(math.log2(reach / math.pi)))
    L = math.pi * 2.0 ** p
    N = 2 ** (p + j + 2)
    return L, N


def _horizon(j, gamma):
    return HORIZON / (gamma * 2.0 ** ((j - 1) * (gamma - 1)))


def _impulse(j, gamma, d, L, N, t0, x0):
    xi = freq_axis(L, N)
    if d == 1:
        shift = np.exp(-1j * x0[0] * xi)
    else:
        shift = np.exp(-1j * np.add.outer(x0[0] * xi, x0[1] * xi))
    a = abs_xi(d, L, N)
    return psi(a / 2.0 ** j) * np.exp(-1j * t0 * a ** gamma) * shift


def _spectral_norms(fhat, d, L, s):
    a = abs_xi(d, L, fhat.shape[-1])
    p = np.abs(fhat) ** 2
    cell = (1.0 / (2.0 * L)) ** d
    return math.sqrt(np.sum(p) * cell), math.sqrt(np.sum((1 + a * a) ** s * p) * cell)


def _ball_energy(fhat, d, L, gamma, times, weights, chunk=512):
    # sum_t w_t ||U_t f||^2_{L^2(B)}
    N = fhat.shape[-1]
    mask = _window_mask(d, L, N, 1.0)
    cell = (2.0 * L / N) ** d
    axes = tuple(range(-d, 0))
    total = 0.0
    for i, vals in evolve_chunks(fhat, d, L, gamma, times, chunk):
        v = vals * mask
        e = np.sum(v.real ** 2 + v.imag ** 2, axis=axes) * cell
        total += float(np.dot(weights[i:i + e.size], e))
    return total


def _check_support(positions):
    if positions.size and (positions.min() < -2.0 or positions.max() > 2.0):
        raise ConfigError("time support must lie in [-2, 2]")


def _band_rows(j, gamma, d, s, alpha, nodes_for, trials, seed, norm_exps):
    L, N = smoothing_grid(j, gamma, d)
    best = None
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(j), int(trial)]))
        times, weights, t0 = nodes_for(rng)
        x0 = rng.uniform(-0.5, 0.5, size=d)
        keep = np.abs(times - t0) <= _horizon(j, gamma)
        fhat = _impulse(j, gamma, d, L, N, t0, x0)
        num = math.sqrt(_ball_energy(fhat, d, L, gamma, times[keep], weights[keep]))
        l2, hs = _spectral_norms(fhat, d, L, s)
        ratio = num / hs
        if best is None or ratio > best.ratio:
            extra = {"l2": l2, "t0": float(t0), "x0": x0.tolist(), "nodes_used": int(keep.sum()),
                     "nodes": int(times.size)}
            for name, e in norm_exps.items():
                extra[name] = num / (2.0 ** (e * j) * l2)
            best = RatioRow(int(j), ratio, num, hs, trial, extra)
    return best


def smoothing_experiment(mu, gamma: float, s: float, js: Sequence[int], trials: int = 8,
                         seed: int = 0, alpha: float | None = None, d: int = 1) -> RatioReport:
    """Per-band local smoothing ratios over a measure.

    Parameters
    ----------
    mu : AtomicMeasure or {"cantor", "lebesgue"}
        A fixed measure, or a kind realized per band by
        :func:`fractime.fracmeasure.measure_for_band`.
    gamma : float
        Must exceed 1.
    s : float
        Sobolev index of the denominator.
    js : sequence of int
    alpha : float, optional
        Growth exponent; taken from ``mu`` when omitted.

    Returns
    -------
    RatioReport
        ``ratio = ||U_t P_j f||_{L^2(dmu; L^2(B))} / ||f||_{H^s}``, maximized
        over trials.  ``extra["target_ratio"]`` divides instead by
        ``2**(alpha (1-gamma) j / 2) ||f||_2``.
    """
    if not gamma > 1:
        raise ConfigError(f"local smoothing requires gamma > 1, got {gamma}")
    if isinstance(mu, AtomicMeasure):
        alpha = mu.alpha if alpha is None else alpha
        kind = mu.meta.get("kind", "fixed")
    elif mu == "lebesgue":
        alpha, kind = 1.0, "lebesgue"
    elif mu == "cantor":
        if alpha is None:
            raise ConfigError("cantor measure needs alpha")
        kind = "cantor"
    else:
        raise ConfigError(f"unknown measure {mu!r}")
    gain = alpha * (1 - gamma) / 2.0
    rows = []
    for j in js:
        m = mu if isinstance(mu, AtomicMeasure) else measure_for_band(mu, alpha, gamma, j)
        _check_support(m.positions)

        def nodes_for(rng, m=m):
            return m.positions, m.weights, m.positions[rng.integers(len(m))]

        rows.append(_band_rows(j, gamma, d, s, alpha, nodes_for, trials, seed, {"target_ratio": gain}))
    config = {"measure": kind, "alpha": alpha, "gamma": gamma, "s": s, "d": d, "trials": trials,
              "seed": seed, "j_range": [int(j) for j in js], "horizon": HORIZON}
    meta = {"gain": gain, "s_minus_gain": s - gain, "covered": s >= gain - 1e-12}
    return RatioReport.build("smoothing", config, rows, meta)


def _certify(E, alpha, gamma, certificate, js, cap):
    theta = (gamma - 1.0) / gamma
    if certificate is None:
        raise ConfigError("certificate missing: pass a SpectrumReport or 'auto'")
    if isinstance(certificate, str):
        if certificate != "auto":
            raise ConfigError(f"unknown certificate {certificate!r}")
        top = max(1, int(math.floor((gamma - 1) * max(js))))
        certificate = spectrum_characteristic(E.refine(2.0 ** (-gamma * max(js))), alpha, theta,
                                              list(range(1, top + 1)))
    if not isinstance(certificate, SpectrumReport):
        raise ConfigError("certificate must be a SpectrumReport")
    if not (math.isclose(certificate.theta, theta) and math.isclose(certificate.alpha, alpha)):
        raise ConfigError(f"certificate is for (alpha, theta) = ({certificate.alpha}, {certificate.theta}), "
                          f"need ({alpha}, {theta})")
    if not certificate.sup_value <= cap:
        raise ConfigError(f"sampled characteristic {certificate.sup_value:.3g} exceeds the cap {cap}")
    return certificate


def smoothing_set_experiment(E: FractalSet, gamma: float, s: float, js: Sequence[int], alpha: float,
                             certificate="auto", cap: float = 10.0, trials: int = 8, seed: int = 0,
                             nodes: int = 8, d: int = 1) -> RatioReport:
    """Local smoothing over the neighbourhoods ``E(2**(-gamma j))``.

    The time integral is Lebesgue measure on the neighbourhood, by the
    composite midpoint rule of :func:`fractime.mixednorm.neighborhood_nodes`.
    ``certificate`` is a :class:`~fractime.dimension.SpectrumReport` for
    ``theta = (gamma - 1) / gamma`` whose value is at most ``cap``, or
    ``"auto"`` to sample one.  ``extra`` reports the ratio against
    ``2**(alpha (1-gamma) j / 2) ||f||_2`` and the sharper
    ``2**((alpha - gamma) j / 2) ||f||_2``.

    Raises
    ------
    ConfigError
        Missing or failing certificate, or ``gamma <= 1``.
    """
    if not gamma > 1:
        raise ConfigError(f"local smoothing requires gamma > 1, got {gamma}")
    cert = _certify(E, alpha, gamma, certificate, js, cap)
    rows = []
    for j in js:
        delta = 2.0 ** (-gamma * j)
        Ej = E.refine(delta)
        nb = neighborhood(Ej, delta)
        ts, ws = neighborhood_nodes(nb, delta, nodes)
        _check_support(ts)
        pts = Ej.points()

        def nodes_for(rng, ts=ts, ws=ws, pts=pts):
            return ts, ws, pts[rng.integers(pts.size)]

        exps = {"target_ratio": alpha * (1 - gamma) / 2.0, "sharp_ratio": (alpha - gamma) / 2.0}
        rows.append(_band_rows(j, gamma, d, s, alpha, nodes_for, trials, seed, exps))
    config = {"set": E.to_json(), "alpha": alpha, "gamma": gamma, "s": s, "d": d, "trials": trials,
              "seed": seed, "nodes": nodes, "j_range": [int(j) for j in js]}
    meta = {"certificate": cert.to_json(), "gain": alpha * (1 - gamma) / 2.0}
    return RatioReport.build("smoothing_set", config, rows, meta)


# Littlewood-Paley assembly ----------------------------------------------------------

@dataclass(frozen=True)
class AssemblyReport:
    direct: float
    pieces: tuple
    triangle: float
    hs: float

    @property
    def ratio(self) -> float:
        return self.direct / self.hs

    def to_json(self) -> dict:
        return {"direct": self.direct, "pieces": list(self.pieces), "triangle": self.triangle,
                "hs": self.hs, "ratio": self.ratio}


def smoothing_assembly(mu: AtomicMeasure, gamma: float, s: float, top: int, seed: int = 0,
                       d: int = 1) -> AssemblyReport:
    """Full-operator norm against its Littlewood-Paley pieces on one torus.

    The input is a sum over ``j = 1..top`` of band impulses with weights
    ``2**(-s j)``, all refocusing at one atom.  ``direct`` is
    ``||U_t f||_{L^2(dmu; L^2(B))}``; ``pieces[0]`` is the ``P_<=0`` part
    and ``pieces[j]`` the ``P_j`` part, for ``j = 1..top+1``, so
    ``direct <= triangle = sum(pieces)``.
    """
    _check_support(mu.positions)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(top)]))
    L, N = smoothing_grid(top + 1, gamma, d)
    t0 = mu.positions[rng.integers(len(mu))]
    x0 = rng.uniform(-0.5, 0.5, size=d)
    fhat = sum(2.0 ** (-s * j) * _impulse(j, gamma, d, L, N, t0, x0) for j in range(1, top + 1))
    a = abs_xi(d, L, N)
    mults = [chi(a)] + [psi(a / 2.0 ** j) for j in range(1, top + 2)]
    energy = lambda g: math.sqrt(_ball_energy(g, d, L, gamma, mu.positions, mu.weights))
    pieces = tuple(energy(m * fhat) for m in mults)
    direct = energy(fhat)
    _, hs = _spectral_norms(fhat, d, L, s)
    return AssemblyReport(direct, pieces, float(sum(pieces)), hs)


# interval counts -------------------------------------------------------------------

def interval_count(E: FractalSet, gamma: float, j: int) -> int:
    """Max over windows ``J`` of length ``2**((1-gamma) j)`` of the number of
    grid cells of length ``2**(-gamma j)`` meeting ``E(2**(-gamma j)) ∩ J``.
    """
    delta = 2.0 ** (-gamma * j)
    nb = neighborhood(E.refine(delta), delta)
    cells = []
    for a, b in zip(nb.starts, nb.ends):
        lo = math.floor(a / delta)
        hi = math.ceil(b / delta) - 1
        cells.append(np.arange(lo, hi + 1))
    cells = np.unique(np.concatenate(cells))
    width = int(round(2.0 ** j))
    # a window of length width*delta meets at most width + 1 consecutive cells
    ends = np.searchsorted(cells, cells + width, side="right")
    return int(np.max(ends - np.arange(cells.size)))
