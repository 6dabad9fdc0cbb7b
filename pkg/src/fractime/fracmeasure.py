"""Atomic approximations of fractal measures.

An :class:`AtomicMeasure` is a finite sum of point masses together with
the scale ``resolution`` below which it no longer stands in for the
measure it approximates.  Balls are open, ``(t - rho, t + rho)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._errors import ConfigError, ResolutionError
from .fracset import Cantor

__all__ = [
    "AtomicMeasure",
    "GrowthReport",
    "cantor_measure",
    "lebesgue_proxy",
    "ball_mass",
    "growth_constant",
    "integrate",
    "measure_for_band",
]


@dataclass(frozen=True)
class AtomicMeasure:
    """Weighted point masses.

    Attributes
    ----------
    positions : ndarray
        Strictly increasing atom locations.
    weights : ndarray
        Positive masses.
    alpha : float
        Nominal growth exponent.
    resolution : float
        Smallest radius at which ball masses are faithful.
    meta : dict
        Construction parameters (kind, depth, ...).
    """

    positions: np.ndarray
    weights: np.ndarray
    alpha: float
    resolution: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if p.shape != w.shape or p.ndim != 1 or p.size == 0:
            raise ConfigError("positions and weights must be equal-length nonempty 1-D arrays")
        if np.any(np.diff(p) <= 0):
            raise ConfigError("atom positions must be strictly increasing")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ConfigError("atom weights must be positive and finite")
        p.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(w)]))

    def __len__(self):
        return self.positions.size

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.weights))

    @property
    def diameter(self) -> float:
        return float(self.positions[-1] - self.positions[0])

    def restrict(self, lo: float, hi: float) -> "AtomicMeasure":
        """Atoms in the closed interval ``[lo, hi]``."""
        m = (self.positions >= lo) & (self.positions <= hi)
        return AtomicMeasure(self.positions[m], self.weights[m], self.alpha, self.resolution, dict(self.meta))

    def write_csv(self, path) -> None:
        """``position,weight`` table plus a ``.json`` sidecar."""
        with open(path, "w", newline="") as fh:
            fh.write("position,weight\r\n")
            for p, w in zip(self.positions, self.weights):
                fh.write(f"{p:.17g},{w:.17g}\r\n")
        side = {"alpha": self.alpha, "resolution": self.resolution,
                "depth": self.meta.get("depth")}
        with open(str(path) + ".json", "w") as fh:
            json.dump(side, fh, sort_keys=True)

    @classmethod
    def read_csv(cls, path) -> "AtomicMeasure":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        with open(str(path) + ".json") as fh:
            side = json.load(fh)
        return cls(data[:, 0], data[:, 1], side["alpha"], side["resolution"],
                   {"depth": side.get("depth")})


def cantor_measure(alpha: float, k: int) -> AtomicMeasure:
    """Depth-``k`` stage of the natural measure on the Cantor set.

    Each step-``k`` interval gets mass ``2**-k`` at its right endpoint.

    Examples
    --------
    >>> mu = cantor_measure(0.5, 1)
    >>> mu.positions.tolist(), mu.weights.tolist()
    ([0.25, 1.0], [0.5, 0.5])
    """
    C = Cantor(alpha, k)
    pts = C.points()
    return AtomicMeasure(pts, np.full(pts.size, 2.0 ** -k), float(alpha), C.resolution,
                         {"kind": "cantor", "depth": int(k)})


def lebesgue_proxy(h: float, lo: float = 0.0, hi: float = 1.0) -> AtomicMeasure:
    """Midpoint rule for Lebesgue measure on ``[lo, hi]`` with spacing ``h``."""
    n = int(round((hi - lo) / h))
    if n < 1:
        raise ConfigError(f"spacing {h} too large for [{lo}, {hi}]")
    h = (hi - lo) / n
    pos = lo + h * (np.arange(n) + 0.5)
    return AtomicMeasure(pos, np.full(n, h), 1.0, h, {"kind": "lebesgue", "spacing": h})


def measure_for_band(kind: str, alpha: float, gamma: float, j: int) -> AtomicMeasure:
    """Measure realized finely enough for frequency band ``j``.

    Resolution is at most ``2**(-gamma j)``, the time scale on which the
    band is locally constant.
    """
    if kind == "cantor":
        k = int(math.ceil(alpha * gamma * j - 1e-12))
        return cantor_measure(alpha, k)
    if kind == "lebesgue":
        return lebesgue_proxy(2.0 ** (-gamma * j))
    raise ConfigError(f"unknown measure kind {kind!r}")


def ball_mass(mu: AtomicMeasure, t, rho: float):
    """``mu((t - rho, t + rho))`` for scalar or array ``t``.

    Raises
    ------
    ResolutionError
        If ``rho`` is below the measure's resolution.
    """
    if rho < mu.resolution * (1 - 1e-12):
        raise ResolutionError(f"radius {rho:.6g} below measure resolution {mu.resolution:.6g}")
    t = np.asarray(t, dtype=float)
    lo = np.searchsorted(mu.positions, t - rho, side="right")
    hi = np.searchsorted(mu.positions, t + rho, side="left")
    out = mu._cum[hi] - mu._cum[lo]
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GrowthReport:
    value: float
    argmax: dict
    alpha: float
    radii: tuple

    def to_json(self) -> dict:
        return {"value": self.value, "argmax": self.argmax, "alpha": self.alpha,
                "radii": list(self.radii)}


def growth_constant(mu: AtomicMeasure, alpha: float, centers: Sequence[float] | None = None,
                    radii: Sequence[float] | None = None) -> GrowthReport:
    """Max of ``mu(B(t, rho)) / rho**alpha`` over sampled centres and radii.

    Centres default to the atoms; radii to powers of two from the
    resolution up to the diameter (at least one radius).
    """
    if centers is None:
        centers = mu.positions
    centers = np.asarray(centers, dtype=float)
    if radii is None:
        lo = math.ceil(-math.log2(max(mu.diameter, mu.resolution)) - 1e-12)
        hi = math.floor(-math.log2(mu.resolution) + 1e-12) if mu.resolution > 0 else lo + 30
        radii = [2.0 ** -m for m in range(lo, hi + 1)]
    radii = tuple(float(r) for r in radii)
    if centers.size == 0 or not radii:
        raise ConfigError("growth_constant needs a nonempty sample plan")
    best = (-1.0, None, None)
    for rho in radii:
        m = ball_mass(mu, centers, rho) / rho ** alpha
        i = int(np.argmax(m))
        if m[i] > best[0]:
            best = (float(m[i]), float(centers[i]), rho)
    return GrowthReport(best[0], {"center": best[1], "radius": best[2]}, float(alpha), radii)


def integrate(mu: AtomicMeasure, h: Callable) -> float:
    """``sum_i w_i h(t_i)``; ``h`` is called once on the position array."""
    vals = np.asarray(h(mu.positions))
    if vals.ndim == 0:
        vals = np.full(mu.positions.shape, vals)
    return float(np.dot(mu.weights, vals))
