"""Homogeneous Strichartz estimates over fractal time.

Kernel calculus on separated time sets, the discrete Young inequality,
the localized bilinear forms ``B_k`` and the end-to-end ratio
experiments for ``||U_t P_j f||_{L^q(dmu; L^r)}`` and its set version.

With ``A_tau = (U_tau P_j)^* F(tau)`` (spectrum ``psi_j e^{-i tau |xi|^gamma} F_hat``),

    B_k(F, G) = sum_{tau, tau'} chi_k(tau, tau') <A^F_{tau'}, A^G_tau>,

so ``sum_k B_k(F, F) = ||sum_tau (U_tau P_j)^* F(tau)||_2**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._errors import ConfigError
from .dimension import assouad_characteristic, dyadic_pairs
from .exponents import (INF, ExponentConfig, admissible, as_exponent, as_rational, in_convex_polygon,
                        lambda_ab, quadrangle_Q, recip, s_gamma, s_gamma_alpha)
from .fracmeasure import AtomicMeasure, growth_constant, measure_for_band
from .fracset import FractalSet, neighborhood, separated_subset
from .mixednorm import TimeSlices, _lq, discrete_norm, lr_norms, neighborhood_nodes, weak_norm
from .reports import RatioReport, RatioRow
from .spectral import abs_xi, band_multiplier, evolve_batch, forward, inverse, psi

__all__ = [
    "KernelMatrix",
    "kernel_matrix",
    "band_mask",
    "kernel_norm_check",
    "KernelNormReport",
    "discrete_young_apply",
    "YoungResult",
    "adjoint_spectra",
    "bilinear_Bk",
    "BilinearResult",
    "dispersive_constant",
    "band_input",
    "band_grid",
    "homogeneous_experiment",
    "space_time_norms",
]


def _decay_exponent(d, r, branch):
    dim = d - 1 if branch == "wave" else d
    return Fraction(dim) * (Fraction(1, 2) - recip(as_exponent(r)))


@dataclass(frozen=True)
class KernelMatrix:
    """``K_r(t, s) = (1 + 2**(gamma j) |t - s|)**(-e)`` on a point set."""

    points: np.ndarray
    entries: np.ndarray
    exponent: Fraction
    gamma: float
    j: int

    def band(self, k: int) -> np.ndarray:
        return band_mask(self.points, self.gamma, self.j, k)


def _scaled_gaps(points, gamma, j):
    p = np.asarray(points, dtype=float)
    return 2.0 ** (gamma * j) * np.abs(p[:, None] - p[None, :])


def kernel_matrix(points, gamma: float, j: int, r, d: int = 1, branch: str = "schrodinger") -> KernelMatrix:
    """Kernel matrix with decay exponent ``d(1/2 - 1/r)`` (``d - 1`` on the wave branch).

    Examples
    --------
    >>> K = kernel_matrix([0.0, 0.25], 1.0, 2, "inf", d=2)
    >>> K.entries.tolist()
    [[1.0, 0.5], [0.5, 1.0]]
    """
    p = np.asarray(points, dtype=float)
    if np.any(np.diff(p) < 0):
        raise ConfigError("kernel points must be sorted")
    e = _decay_exponent(d, r, branch)
    K = (1.0 + _scaled_gaps(p, gamma, j)) ** (-float(e))
    return KernelMatrix(p, K, e, float(gamma), int(j))


def band_mask(points, gamma: float, j: int, k: int) -> np.ndarray:
    """Indicator of ``2**(k-1) < 2**(gamma j)|t - s| <= 2**k`` (``<= 1`` for ``k = 0``)."""
    g = _scaled_gaps(points, gamma, j)
    if k == 0:
        return g <= 1.0
    return (g > 2.0 ** (k - 1)) & (g <= 2.0 ** k)


@dataclass(frozen=True)
class KernelNormReport:
    mode: str
    s_exp: float
    js: tuple
    column_norms: tuple
    characteristic: float
    normalized: tuple
    meta: dict = field(default_factory=dict)

    @property
    def spread(self) -> float:
        """Max over min of the normalized column norms across ``j``."""
        return max(self.normalized) / min(self.normalized)

    def to_json(self) -> dict:
        return {"mode": self.mode, "s_exp": self.s_exp, "j": list(self.js),
                "column_norms": list(self.column_norms), "characteristic": self.characteristic,
                "normalized": list(self.normalized), "spread": self.spread, "meta": self.meta}


def _column_norms(K: np.ndarray, s, weak: bool) -> np.ndarray:
    if weak:
        return np.array([weak_norm(K[:, c], s) for c in range(K.shape[1])])
    if s == math.inf:
        return K.max(axis=0)
    return np.sum(K ** s, axis=0) ** (1.0 / s)


def kernel_norm_check(E: FractalSet, d: int, gamma, alpha, r, s_exp, js, mode: str = "strong",
                      branch: str = "schrodinger", characteristic: float | None = None,
                      assouad_windows=None, enforce: bool = True) -> KernelNormReport:
    """Sup over columns of the ``l**s`` (``mode='strong'``) or ``l**(s,inf)`` norm of ``K_r``.

    The strong bound needs ``e > alpha / s``; the weak bound is the
    equality case ``e = alpha / s``.  Column norms are divided by
    ``[E]_alpha**(1/s)``; the characteristic is sampled over dyadic windows
    unless given.  ``enforce=False`` skips the exponent check, which is
    how the strong norm is measured at the equality case.

    Raises
    ------
    ConfigError
        The exponent relation required by the chosen mode fails.
    """
    e = _decay_exponent(d, r, branch)
    s = as_exponent(s_exp)
    a_over_s = as_rational(alpha) / s if s is not INF else Fraction(0)
    if mode not in ("strong", "weak"):
        raise ConfigError(f"unknown mode {mode!r}")
    if enforce and mode == "strong" and not e > a_over_s:
        raise ConfigError(
            f"strong column bound needs d(1/2 - 1/r) = {e} > alpha/s = {a_over_s}; "
            "use mode='weak' at equality"
        )
    if enforce and mode == "weak" and e != a_over_s:
        raise ConfigError(f"weak column bound is the equality case d(1/2 - 1/r) = alpha/s; got {e} vs {a_over_s}")
    gamma = float(gamma)
    sf = float(s)
    norms = []
    for j in js:
        Ej = separated_subset(E.refine(2.0 ** (-gamma * j)), gamma, j)
        K = kernel_matrix(Ej.points, gamma, j, r, d, branch).entries
        norms.append(float(_column_norms(K, sf, mode == "weak").max()))
    if characteristic is None:
        lo, hi = E.bounds
        top = max(0, math.floor(-math.log2(max(hi - lo, 2.0 ** -40))))
        bottom = math.floor(-math.log2(max(E.refine(2.0 ** (-gamma * max(js))).resolution, 2.0 ** -40)))
        wins = assouad_windows or list(range(top, bottom + 1, 2))
        characteristic = assouad_characteristic(E.refine(2.0 ** -max(wins)), float(alpha),
                                                pairs=dyadic_pairs(wins)).sup_value
    scale = characteristic ** (1.0 / sf) if sf != math.inf else 1.0
    normalized = tuple(n / scale for n in norms)
    return KernelNormReport(mode, sf, tuple(int(j) for j in js), tuple(norms), float(characteristic),
                            normalized, {"exponent": str(e), "branch": branch,
                                        "relation": "gt" if e > a_over_s else ("eq" if e == a_over_s else "lt")})


@dataclass(frozen=True)
class YoungResult:
    value: float
    bound: float
    constant: float
    B: float

    def to_json(self) -> dict:
        return {"value": self.value, "bound": self.bound, "constant": self.constant, "B": self.B}


def discrete_young_apply(K, a, p, q, weak: bool = False) -> YoungResult:
    """``||K a||_q`` against ``B ||a||_p`` with ``1/p - 1/q = 1 - 1/s``.

    ``B`` is the larger of the sup column and sup row ``l**s`` norms (weak
    norms when ``weak``).  ``constant = value / bound``.

    Examples
    --------
    >>> import numpy as np
    >>> discrete_young_apply(np.ones((3, 3)), [1.0, 2.0, 3.0], 1, "inf").constant
    1.0
    """
    M = K.entries if isinstance(K, KernelMatrix) else np.asarray(K, dtype=float)
    a = np.asarray(a, dtype=float)
    P, Q = as_exponent(p), as_exponent(q)
    inv_s = 1 - (recip(P) - recip(Q))
    if not 0 <= inv_s <= 1:
        raise ConfigError(f"exponents p={p}, q={q} give 1/s = {inv_s} outside [0, 1]")
    s = math.inf if inv_s == 0 else float(1 / inv_s)
    if weak and not 1 < s < math.inf:
        raise ConfigError("weak Young bound needs 1 < s < inf")
    B = max(_column_norms(np.abs(M), s, weak).max(), _column_norms(np.abs(M).T, s, weak).max())
    value = discrete_norm(M @ a, float(Q))
    bound = float(B) * discrete_norm(a, float(P))
    return YoungResult(value, bound, value / bound if bound > 0 else 0.0, float(B))


def adjoint_spectra(slices: TimeSlices, gamma: float, j: int) -> np.ndarray:
    """Spectra of ``(U_tau P_j)^* F(tau)`` for every slice."""
    mult = band_multiplier(slices.d, slices.L, slices.N, j, "psi")
    sym = abs_xi(slices.d, slices.L, slices.N) ** gamma
    expand = (slice(None),) + (None,) * slices.d
    F = forward(slices.values, slices.d, slices.L)
    return F * mult * np.exp(-1j * slices.times[expand] * sym)


def _gram(AF, AG, d, L):
    # M[tau, tau'] = <A^F_{tau'}, A^G_tau>
    n = AF.shape[0]
    cell = (1.0 / (2.0 * L)) ** d
    return (AG.reshape(n, -1).conj() @ AF.reshape(n, -1).T) * cell


@dataclass(frozen=True)
class BilinearResult:
    value: complex
    bound: float
    ratio: float
    empty: bool

    def to_json(self) -> dict:
        return {"re": self.value.real, "im": self.value.imag, "bound": self.bound,
                "ratio": self.ratio, "empty": self.empty}


def bilinear_Bk(F: TimeSlices, G: TimeSlices, k: int, gamma: float, j: int, alpha,
                a=2, b=2, characteristic: float = 1.0, d: int | None = None) -> BilinearResult:
    """``B_k(F, G)`` and its ratio to ``2**(2 lam j) 2**((alpha - lam) k) [E]_alpha ||F|| ||G||``.

    ``lam = lambda(a, b)``, norms are ``l**2_tau L**(a')`` and
    ``l**2_tau L**(b')``.  ``(1/a, 1/b)`` must lie in the closed
    quadrangle with vertices ``O, A, D, A'``.
    """
    if not F.same_grid(G):
        raise ConfigError("F and G must share grid and time atoms")
    d = F.d if d is None else d
    A_, B_ = as_exponent(a), as_exponent(b)
    if not in_convex_polygon((recip(A_), recip(B_)), quadrangle_Q(d, alpha)):
        raise ConfigError(f"(1/a, 1/b) = ({recip(A_)}, {recip(B_)}) lies outside the quadrangle Q")
    mask = band_mask(F.times, gamma, j, k)
    lam = float(lambda_ab(d, A_, B_))
    def dual(x):
        return math.inf if x is INF or x == 1 else float(x / (x - 1))
    nF = discrete_norm(lr_norms(F.values, F.d, F.L, dual(A_)), 2)
    nG = discrete_norm(lr_norms(G.values, G.d, G.L, dual(B_)), 2)
    bound = 2.0 ** (2 * lam * j) * 2.0 ** ((float(alpha) - lam) * k) * characteristic * nF * nG
    if not mask.any():
        return BilinearResult(0j, bound, 0.0, True)
    M = _gram(adjoint_spectra(F, gamma, j), adjoint_spectra(G, gamma, j), F.d, F.L)
    value = complex(np.sum(M[mask]))
    return BilinearResult(value, bound, abs(value) / bound if bound > 0 else 0.0, False)


def dispersive_constant(d: int, gamma: float, j: int, gap: float, branch: str = "schrodinger",
                        L: float | None = None, N: int | None = None) -> float:
    """Measured constant of the dispersive bound for ``T_{t,s} = U_{t-s} P_j**2``.

    Returns ``sup_x |kernel| / (2**(dj) (1 + 2**(gamma j) gap)**(-e))`` with
    ``e = d/2`` (``(d-1)/2`` on the wave branch).  The grid must hold the dispersed kernel; the default
    half-period scales with ``gamma 2**((gamma-1) j) gap``.
    """
    if L is None:
        spread = 4.0 * max(gamma, 1.0) * 2.0 ** ((gamma - 1) * j) * gap * 2.0 ** 1 + 64.0 * 2.0 ** -j
        L = math.pi * 2.0 ** math.ceil(math.log2(max(spread, 1.0)))
    if N is None:
        N = int(2 ** math.ceil(math.log2(2.0 ** (j + 2) * L / math.pi * 2)))
    a = abs_xi(d, L, N)
    m = psi(a / 2.0 ** j) ** 2 * np.exp(1j * gap * a ** gamma)
    K = np.abs(inverse(m, d, L)).max()
    dim = d - 1 if branch == "wave" else d
    ref = 2.0 ** (d * j) * (1.0 + 2.0 ** (gamma * j) * gap) ** (-dim / 2.0)
    return float(K / ref)


# experiments -----------------------------------------------------------------

def band_grid(j: int, d: int = 1):
    """Default grid for band ``j``: ``L = pi/2``, ``xi_max = 2**(j+2)``."""
    return d, math.pi / 2.0, 2 ** (j + 2)


def band_input(rng: np.random.Generator, d: int, L: float, N: int, j: int) -> np.ndarray:
    """Unit-normal complex spectral coefficients on ``supp psi(2**-j |xi|)``."""
    a = abs_xi(d, L, N)
    supp = psi(a / 2.0 ** j) > 0
    fhat = np.zeros(a.shape, dtype=np.complex128)
    n = int(supp.sum())
    fhat[supp] = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return fhat


def _sobolev_from_spectrum(fhat, d, L, s):
    a = abs_xi(d, L, fhat.shape[-1])
    return math.sqrt(float(np.sum((1 + a * a) ** s * np.abs(fhat) ** 2)) * (1.0 / (2.0 * L)) ** d)


def space_time_norms(ghats, d, L, gamma, times, q, r, weights=None, radius=None, chunk=2048):
    """``||U_t g_b||_{L^q(w dt; L^r)}`` for a stack of spectra ``g_b``."""
    ghats = np.asarray(ghats)
    norms = np.empty((ghats.shape[0], len(times)))
    for i, b, vals in evolve_batch(ghats, d, L, gamma, times, chunk):
        norms[b, i:i + vals.shape[0]] = lr_norms(vals, d, L, r, radius)
    return np.array([_lq(n, weights, q) for n in norms])


def _seed(seed, j, trial):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(j), int(trial)]))


def homogeneous_experiment(cfg: ExponentConfig, js, trials: int = 20, seed: int = 0,
                           measure: str | None = "cantor", E: FractalSet | None = None,
                           nodes: int = 8, characteristic: float | None = None,
                           chunk: int = 2048) -> RatioReport:
    """Max-over-trials Strichartz ratios per band with a log2 slope fit.

    Measure form (``measure`` is ``'cantor'`` or ``'lebesgue'``)::

        ||U_t P_j f||_{L^q(dmu_j; L^r)} / (<mu_j>_alpha**(1/q) ||f||_{H^s})

    where ``mu_j`` is the measure realized at resolution ``<= 2**(-gamma j)``.
    Set form (``E`` given): the time domain is ``E(2**(-gamma j))``
    discretized by :func:`neighborhood_nodes`, and the denominator uses
    ``[E]_alpha**(1/q)``.

    Inputs are unit-normal spectral coefficients on the annulus; the max
    over trials lower-bounds the operator norm at each scale.
    """
    d, gamma, alpha = cfg.d, float(cfg.gamma), float(cfg.alpha)
    q, r, s = float(cfg.q), float(cfg.r), float(cfg.s)
    verdict = admissible(cfg)
    rows = []
    for j in js:
        dd, L, N = band_grid(j, d)
        mult = band_multiplier(d, L, N, j, "psi")
        if E is None:
            mu = measure_for_band(measure, alpha, gamma, j)
            times, weights = mu.positions, mu.weights
            const = growth_constant(mu, alpha).value
        else:
            delta = 2.0 ** (-gamma * j)
            Ej = E.refine(2 * delta)
            times, weights = neighborhood_nodes(neighborhood(Ej, delta), delta, nodes)
            if characteristic is None:
                raise ConfigError("set-form experiment needs the Assouad characteristic of E")
            const = characteristic
        best = None
        fhats = np.stack([band_input(_seed(seed, j, t), d, L, N, j) for t in range(trials)])
        nums = space_time_norms(fhats * mult, d, L, gamma, times, q, r, weights, chunk=chunk)
        for trial in range(trials):
            num = float(nums[trial])
            den = const ** (1.0 / q) * _sobolev_from_spectrum(fhats[trial], d, L, s)
            ratio = num / den
            if best is None or ratio > best.ratio:
                best = RatioRow(int(j), ratio, num, den, trial, {"atoms": int(len(times)), "constant": const})
        rows.append(best)
    config = {"exponents": cfg.to_json(), "trials": trials, "seed": seed,
              "form": "set" if E is not None else "measure",
              "measure": measure if E is None else None,
              "j_range": [int(j) for j in js]}
    meta = {"admissible": verdict.to_json(), "s_gamma": str(s_gamma(cfg)),
            "s_gamma_alpha": str(s_gamma_alpha(cfg)), "estimator": "max over trials (lower bound)"}
    if cfg.r is not INF and cfg.q == 2 and Fraction(cfg.d) > 2 * cfg.alpha and cfg.r == 2 * cfg.d / (cfg.d - 2 * cfg.alpha):
        meta["endpoint"] = "(q, r) = (2, r_*): Lorentz refinements are not distinguished numerically"
    return RatioReport.build("homogeneous", config, rows, meta)
