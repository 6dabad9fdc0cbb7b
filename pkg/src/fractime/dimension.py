"""Covering-number dimension estimates.

Minkowski slopes, the Assouad characteristic

    [E]_alpha = sup_{I, delta <= |I|} (delta / |I|)**alpha * N(E ∩ I, delta),

and its spectrum variant with ``delta = |I|**(1/theta)``.  The suprema are
taken over a finite sampling plan: windows of dyadic size centred at
representative points (thinned at a quarter of the window size) and the
listed covering lengths.  For sets that are dyadic in the sampled scales
the sampled sup is within a factor ``2**alpha`` of the true one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._errors import ConfigError, InsufficientDataError
from .fracset import FractalSet, _greedy_separate, covering_number
from .reports import SlopeFit, fit_slope, write_csv

__all__ = [
    "MinkowskiReport",
    "AssouadReport",
    "SpectrumReport",
    "minkowski_estimate",
    "dyadic_pairs",
    "covering_table",
    "assouad_characteristic",
    "spectrum_characteristic",
    "spectrum_pairs",
    "CoveringTable",
]


@dataclass(frozen=True)
class MinkowskiReport:
    exponents: tuple
    counts: tuple
    fit: SlopeFit

    @property
    def slope(self) -> float:
        return self.fit.slope

    @property
    def residual(self) -> float:
        return self.fit.residual

    def to_json(self) -> dict:
        return {"exponents": list(self.exponents), "counts": list(self.counts),
                "slope": self.slope, "residual": self.residual}


def minkowski_estimate(E: FractalSet, exponents: Iterable[int]) -> MinkowskiReport:
    """Fit ``log2 N(E, 2**-m)`` against ``m``.

    The set is refined to the finest requested scale first.

    Raises
    ------
    InsufficientDataError
        Fewer than three scales.
    """
    ms = tuple(int(m) for m in exponents)
    if len(ms) < 3:
        raise InsufficientDataError(f"minkowski_estimate needs >= 3 scales, got {len(ms)}")
    E = E.refine(2.0 ** -max(ms))
    counts = tuple(covering_number(E, 2.0 ** -m) for m in ms)
    fit = fit_slope(ms, np.log2(counts))
    return MinkowskiReport(ms, counts, fit)


def dyadic_pairs(window_exps: Sequence[int], delta_exps: Sequence[int] | None = None):
    """Pairs ``(2**-m', 2**-m)`` with ``m >= m'``.

    ``delta_exps`` defaults to ``window_exps``.
    """
    dex = sorted(set(window_exps if delta_exps is None else delta_exps))
    return [(2.0 ** -w, 2.0 ** -m) for w in sorted(set(window_exps)) for m in dex if m >= w]


def _windows(E: FractalSet, size: float, restrict_unit: bool):
    centres = _greedy_separate(E.points(), size / 4.0)
    lo = centres - size / 2.0
    if restrict_unit:
        if size > 1.0:
            raise ConfigError(f"window of size {size} does not fit in [0, 1]")
        lo = np.clip(lo, 0.0, 1.0 - size)
    return centres, lo


@dataclass(frozen=True)
class CoveringTable:
    """Maximal covering counts over window centres, per ``(|I|, delta)`` pair."""

    pairs: tuple
    counts: tuple
    centres: tuple
    restrict_unit: bool


def covering_table(E: FractalSet, pairs, restrict_unit: bool = False) -> CoveringTable:
    """Max over centres of ``N(E ∩ I, delta)`` for each pair.

    Independent of the probe exponent, so one table serves many alphas.
    """
    pairs = tuple(sorted((float(w), float(d)) for w, d in pairs))
    if not pairs:
        raise ConfigError("empty sampling plan")
    for w, d in pairs:
        if not 0 < d <= w * (1 + 1e-12):
            raise ConfigError(f"sampling pair needs 0 < delta <= |I|, got ({w}, {d})")
    E = E.refine(min(d for _, d in pairs))
    counts, centres = [], []
    win_cache = {}
    for w, d in pairs:
        if w not in win_cache:
            win_cache[w] = _windows(E, w, restrict_unit)
        cen, lo = win_cache[w]
        best, arg = -1, 0.0
        for c, a in zip(cen, lo):
            n = covering_number(E, d, window=(a, a + w))
            if n > best:
                best, arg = n, float(c)
        counts.append(best)
        centres.append(arg)
    return CoveringTable(pairs, tuple(counts), tuple(centres), restrict_unit)


@dataclass(frozen=True)
class AssouadReport:
    alpha: float
    sup_value: float
    argmax: dict
    table: tuple
    scale_range: dict
    restrict_unit: bool
    sampling_factor: float
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "sup_value": self.sup_value,
            "argmax": self.argmax,
            "table": [list(r) for r in self.table],
            "scale_range": self.scale_range,
            "restrict_unit": self.restrict_unit,
            "sampling_factor": self.sampling_factor,
            "meta": self.meta,
        }

    def write_csv(self, path) -> None:
        write_csv(path, ["window", "delta", "count", "ratio"], self.table)


@dataclass(frozen=True)
class SpectrumReport(AssouadReport):
    theta: float = 0.5

    def to_json(self) -> dict:
        doc = super().to_json()
        doc["theta"] = self.theta
        return doc


def _sup(table: CoveringTable, alpha: float):
    rows = []
    best = None
    for (w, d), n, c in zip(table.pairs, table.counts, table.centres):
        ratio = (d / w) ** alpha * n
        rows.append((w, float(d), int(n), float(ratio)))
        # max, ties broken toward the lexicographically smallest (|I|, delta)
        if best is None or ratio > best[0]:
            best = (ratio, w, d, n, c)
    ratio, w, d, n, c = best
    argmax = {"window": w, "delta": d, "count": int(n), "centre": c}
    exps = [-math.log2(w) for w, _ in table.pairs], [-math.log2(d) for _, d in table.pairs]
    scale_range = {"window_exp": [min(exps[0]), max(exps[0])],
                   "delta_exp": [min(exps[1]), max(exps[1])]}
    return float(ratio), argmax, tuple(rows), scale_range


def assouad_characteristic(E: FractalSet, alpha: float, pairs=None, window_exps=None,
                           delta_exps=None, restrict_unit: bool = False,
                           table: CoveringTable | None = None) -> AssouadReport:
    """Sampled alpha-Assouad characteristic.

    Parameters
    ----------
    E : FractalSet
    alpha : float
        Probe exponent.
    pairs : list of (window, delta), optional
        Explicit sampling plan.  Otherwise built by :func:`dyadic_pairs`.
    window_exps, delta_exps : sequence of int, optional
        Dyadic exponents for the default plan.
    restrict_unit : bool
        Shift windows inside ``[0, 1]`` instead of letting them range over
        the line.
    table : CoveringTable, optional
        Precomputed counts to reuse across alphas.
    """
    if table is None:
        if pairs is None:
            if window_exps is None:
                raise ConfigError("give a sampling plan: pairs or window_exps")
            pairs = dyadic_pairs(window_exps, delta_exps)
        table = covering_table(E, pairs, restrict_unit)
    sup, argmax, rows, scale_range = _sup(table, float(alpha))
    return AssouadReport(float(alpha), sup, argmax, rows, scale_range,
                         table.restrict_unit, 2.0 ** alpha)


def spectrum_pairs(theta: float, window_exps: Sequence[int]):
    return [(2.0 ** -m, 2.0 ** (-m / theta)) for m in window_exps]


def spectrum_characteristic(E: FractalSet, alpha: float, theta: float,
                            window_exps: Sequence[int], table: CoveringTable | None = None) -> SpectrumReport:
    """Sampled ``(alpha, theta)``-Assouad characteristic over windows in ``[0, 1]``.

    Each window ``|I| = 2**-m`` is paired with ``delta = |I|**(1/theta)``.
    """
    if not 0.0 < theta < 1.0:
        raise ConfigError(f"theta = {theta} must lie in (0, 1)")
    if table is None:
        table = covering_table(E, spectrum_pairs(theta, window_exps), restrict_unit=True)
    sup, argmax, rows, scale_range = _sup(table, float(alpha))
    return SpectrumReport(float(alpha), sup, argmax, rows, scale_range, True,
                          2.0 ** alpha, theta=float(theta))
