"""Inhomogeneous estimates over fractal time.

``inhom_apply`` evaluates

    out(t) = sum_s w_s U_{sign (t - s)} F(s)

over the atoms of a measure, optionally retarded to ``0 <= s <= t``
(closed at ``s = t``).  Because every term shares the multiplier
``exp(i sign t |xi|**gamma)``, the sum is a prefix sum of
``w_s exp(-i sign s |xi|**gamma) F_hat(s)`` over ascending ``s``.

The band forms are

    T_k(F, G) = sum_{s, t} chi_k(t - s) w_s w_t <U_s P_j F(s), U_t P~_j G(t)>,

and ``sum_k T_k`` equals the pairing of the non-retarded sum with sign
``-1`` against ``P~_j G``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._errors import ConfigError
from .exponents import INF, InhomExponents, as_exponent, in_convex_polygon, quadrangle_Q
from .fracmeasure import AtomicMeasure, measure_for_band
from .mixednorm import TimeSlices, _lq, lr_norms
from .reports import RatioReport, RatioRow
from .spectral import abs_xi, band_multiplier, forward, freq_axis, inverse
from .strichartz_hom import band_grid, band_mask

__all__ = [
    "inhom_apply",
    "inhom_bandform",
    "BandFormResult",
    "inhom_experiment",
    "impulse_slices",
]


def inhom_apply(F: TimeSlices, gamma: float, retarded: bool = False, eval_times=None,
                sign: int | None = None) -> TimeSlices:
    """Atomic Duhamel-type sum of the propagated slices.

    Parameters
    ----------
    F : TimeSlices
        Slices at the atoms, with the atom weights attached.
    gamma : float
    retarded : bool
        Keep only atoms with ``0 <= s <= t``.
    eval_times : array_like, optional
        Output times; defaults to the atoms (the output carries their weights).
    sign : {+1, -1}, optional
        Propagation direction; ``+1`` by default, ``-1`` when retarded.

    Examples
    --------
    >>> import numpy as np
    >>> v = np.ones((1, 8), dtype=complex)
    >>> F = TimeSlices([0.5], v, 1, 1.0, 8, weights=[0.25])
    >>> float(abs(inhom_apply(F, 2.0, retarded=True, eval_times=[0.1]).values).max())
    0.0
    """
    if F.weights is None:
        raise ConfigError("inhom_apply needs measure weights on the input slices")
    if sign is None:
        sign = -1 if retarded else 1
    if sign not in (1, -1):
        raise ConfigError("sign must be +1 or -1")
    order = np.argsort(F.times, kind="stable")
    s = F.times[order]
    w = F.weights[order]
    d, L = F.d, F.L
    sym = abs_xi(d, L, F.N) ** gamma
    expand = (slice(None),) + (None,) * d
    spec = forward(F.values[order], d, L)
    terms = w[expand] * np.exp(-1j * sign * s[expand] * sym) * spec
    t = F.times if eval_times is None else np.asarray(eval_times, dtype=float)
    if retarded:
        prefix = np.concatenate([np.zeros((1,) + terms.shape[1:], dtype=complex), np.cumsum(terms, axis=0)])
        hi = np.searchsorted(s, t, side="right")
        lo = np.searchsorted(s, 0.0, side="left")
        hi = np.maximum(hi, lo)
        acc = prefix[hi] - prefix[lo]
    else:
        acc = np.broadcast_to(terms.sum(axis=0), (t.size,) + terms.shape[1:])
    out = inverse(np.exp(1j * sign * t[expand] * sym) * acc, d, L)
    weights = F.weights if eval_times is None else None
    return TimeSlices(t, out, d, L, F.N, weights)


@dataclass(frozen=True)
class BandFormResult:
    value: complex
    bound: float
    ratio: float
    empty: bool

    def to_json(self) -> dict:
        return {"re": self.value.real, "im": self.value.imag, "bound": self.bound,
                "ratio": self.ratio, "empty": self.empty}


def _dual(p):
    p = as_exponent(p)
    if p is INF:
        return 1.0
    if p == 1:
        return math.inf
    return float(p / (p - 1))


def _pair_gram(F: TimeSlices, G: TimeSlices, gamma: float, j: int) -> np.ndarray:
    # M[t, s] = w_t w_s <U_s P_j F(s), U_t P~_j G(t)>
    d, L, N = F.d, F.L, F.N
    sym = abs_xi(d, L, N) ** gamma
    expand = (slice(None),) + (None,) * d
    a = forward(F.values, d, L) * band_multiplier(d, L, N, j, "psi") * np.exp(1j * F.times[expand] * sym)
    b = forward(G.values, d, L) * band_multiplier(d, L, N, j, "tilde") * np.exp(1j * G.times[expand] * sym)
    cell = (1.0 / (2.0 * L)) ** d
    M = (b.reshape(len(G), -1).conj() @ a.reshape(len(F), -1).T) * cell
    return M * np.outer(G.weights, F.weights)


def inhom_bandform(F: TimeSlices, G: TimeSlices, k: int, j: int, exps: InhomExponents,
                   check_region: bool = True) -> BandFormResult:
    """``T_k(F, G)`` and its ratio to ``2**(sigma j) 2**(-lam k) ||F|| ||G||``.

    Norms are ``L^{qt'}(dmu; L^{rt'})`` for ``F`` and ``L^{q'}(dmu; L^{r'})``
    for ``G``.  With ``check_region`` the point ``(1/rt, 1/r)`` must lie in
    the closed quadrangle Q and the time exponents in their admissible range.
    """
    if F.weights is None or G.weights is None or not F.same_grid(G):
        raise ConfigError("F and G must share grid, atoms and weights")
    if check_region:
        if not in_convex_polygon(exps.point, quadrangle_Q(exps.d, exps.alpha)):
            raise ConfigError(f"(1/rt, 1/r) = {exps.point} lies outside the quadrangle Q")
        if not exps.q_range_ok:
            raise ConfigError("time exponents (qt, q) violate the admissible q-range")
    gamma = float(exps.gamma)
    mask = band_mask(F.times, gamma, j, k)
    nF = _lq(lr_norms(F.values, F.d, F.L, _dual(exps.rt)), F.weights, _dual(exps.qt))
    nG = _lq(lr_norms(G.values, G.d, G.L, _dual(exps.r)), G.weights, _dual(exps.q))
    bound = 2.0 ** (float(exps.sigma) * j) * 2.0 ** (-float(exps.lam) * k) * nF * nG
    if not mask.any():
        return BandFormResult(0j, bound, 0.0, True)
    M = _pair_gram(F, G, gamma, j)
    value = complex(np.sum(M[mask]))
    return BandFormResult(value, bound, abs(value) / bound if bound > 0 else 0.0, False)


def impulse_slices(rng: np.random.Generator, mu: AtomicMeasure, j: int, gamma: float,
                   d: int, L: float, N: int, x_spread: float = 0.5) -> TimeSlices:
    """Band-limited impulses on the atoms of one ``I_tau`` block.

    A random atom ``tau`` is drawn; atoms with ``|s - tau| < 2**(1 - gamma j)``
    receive ``c_s P~_j delta_{x0}`` with unit-normal complex ``c_s`` and a
    random ``|x0| <= x_spread``.  All other slices vanish.
    """
    tau = mu.positions[rng.integers(mu.positions.size)]
    block = np.abs(mu.positions - tau) < 2.0 ** (1 - gamma * j)
    x0 = rng.uniform(-x_spread, x_spread, size=d)
    xi = freq_axis(L, N)
    phase = np.exp(-1j * x0[0] * xi) if d == 1 else np.exp(-1j * np.add.outer(x0[0] * xi, x0[1] * xi))
    base = band_multiplier(d, L, N, j, "tilde") * phase
    c = np.zeros(mu.positions.size, dtype=complex)
    n = int(block.sum())
    c[block] = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    spec = c[(slice(None),) + (None,) * d] * base
    return TimeSlices(mu.positions, inverse(spec, d, L), d, L, N, mu.weights)


def inhom_experiment(exps: InhomExponents, js, trials: int = 8, seed: int = 0, measure: str = "cantor",
                     require_hypotheses: bool = True) -> RatioReport:
    """Max-over-trials ratio ``||U_j F||_{L^q(dmu; L^r)} / ||F||_{L^{qt'}(dmu; L^{rt'})}``.

    ``U_j F`` is the retarded sum of :func:`inhom_apply` applied to
    ``P_j F``.  Inputs come from :func:`impulse_slices`.

    Raises
    ------
    ConfigError
        ``require_hypotheses`` is set and the configuration is not labelled
        ``"covered"``; the message names the failing condition.
    """
    if require_hypotheses and exps.label != "covered":
        reasons = []
        if exps.gamma < 2:
            reasons.append("gamma >= 2")
        if exps.out_of_scope:
            reasons.append("alpha < d/gamma")
        if not exps.in_H or exps.at_C:
            reasons.append("(1/rt, 1/r) in H minus {C, C'}")
        if not exps.q_range_ok:
            reasons.append("q-range conditions")
        if exps.r is INF or exps.rt is INF:
            reasons.append("finite space exponents")
        raise ConfigError(f"configuration labelled {exps.label!r}; failing: {', '.join(reasons) or 'unknown'}")
    gamma, alpha, d = float(exps.gamma), float(exps.alpha), exps.d
    rows = []
    for j in js:
        _, L, N = band_grid(j, d)
        mu = measure_for_band(measure, alpha, gamma, j)
        best = None
        for trial in range(trials):
            rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(j), int(trial)]))
            F = impulse_slices(rng, mu, j, gamma, d, L, N)
            PF = TimeSlices(F.times, inverse(forward(F.values, d, L) * band_multiplier(d, L, N, j, "psi"), d, L),
                            d, L, N, F.weights)
            out = inhom_apply(PF, gamma, retarded=True)
            num = _lq(lr_norms(out.values, d, L, float(exps.r)), mu.weights, float(exps.q))
            den = _lq(lr_norms(F.values, d, L, _dual(exps.rt)), mu.weights, _dual(exps.qt))
            ratio = num / den
            if best is None or ratio > best.ratio:
                best = RatioRow(int(j), ratio, num, den, trial, {"atoms": int(len(mu))})
        rows.append(best)
    config = {"exponents": exps.to_json(), "trials": trials, "seed": seed, "measure": measure,
              "j_range": [int(j) for j in js]}
    meta = {"label": exps.label, "sigma": str(exps.sigma), "lambda": str(exps.lam),
            "hypotheses_enforced": require_hypotheses}
    return RatioReport.build("inhom", config, rows, meta)
