"""Mixed space-time norms over atomic and interval time domains."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._errors import ConfigError
from .fracset import Neighborhood
from .spectral import GridFunction, space_axis

__all__ = [
    "TimeSlices",
    "lr_norms",
    "mixed_norm",
    "discrete_norm",
    "weak_norm",
    "neighborhood_nodes",
]


@dataclass(frozen=True)
class TimeSlices:
    """Fields ``F(., t_i)`` on a common grid, with optional time weights.

    ``values`` has shape ``(n_times,) + (N,)*d``.
    """

    times: np.ndarray
    values: np.ndarray
    d: int
    L: float
    N: int
    weights: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (t.size,) + (self.N,) * self.d:
            raise ConfigError(f"slice array shape {v.shape} does not match {t.size} times on an N={self.N}, d={self.d} grid")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != t.shape:
                raise ConfigError(f"{w.size} weights for {t.size} time slices")
            if np.any(w < 0):
                raise ConfigError("time weights must be nonnegative")
            object.__setattr__(self, "weights", w)

    @classmethod
    def from_fields(cls, times: Sequence[float], fields: Sequence[GridFunction], weights=None):
        if len(fields) == 0:
            raise ConfigError("need at least one slice")
        g = fields[0]
        if any(not g.same_grid(f) for f in fields):
            raise ConfigError("time slices live on different grids")
        return cls(np.asarray(times), np.stack([f.values for f in fields]), g.d, g.L, g.N, weights)

    def __len__(self):
        return self.times.size

    def field(self, i: int) -> GridFunction:
        return GridFunction(self.d, self.L, self.N, self.values[i])

    def same_grid(self, other: "TimeSlices") -> bool:
        return (self.d, self.L, self.N) == (other.d, other.L, other.N) and np.array_equal(self.times, other.times)


def _window_mask(d, L, N, radius):
    x = space_axis(L, N)
    if d == 1:
        return np.abs(x) <= radius
    X, Y = np.meshgrid(x, x, indexing="ij")
    return X * X + Y * Y <= radius * radius


def lr_norms(values: np.ndarray, d: int, L: float, r: float, radius: float | None = None) -> np.ndarray:
    """Per-slice grid ``L**r`` norms over the last ``d`` axes.

    ``r = inf`` is the sample maximum, a lower bound for the continuum sup.
    ``radius`` restricts the quadrature to ``|x| <= radius``.
    """
    N = values.shape[-1]
    if radius is not None:
        values = values * _window_mask(d, L, N, radius)
    axes = tuple(range(-d, 0))
    if r == math.inf:
        return np.abs(values).max(axis=axes)
    cell = (2.0 * L / N) ** d
    return (np.sum(_abs_pow(values, r), axis=axes) * cell) ** (1.0 / r)


def _abs_pow(v, r):
    # |v|**r, with even integer powers by repeated multiplication
    if np.iscomplexobj(v):
        p = v.real * v.real
        p += v.imag * v.imag
    else:
        p = v * v
    if r == 2:
        return p
    if r == int(r) and int(r) % 2 == 0:
        out = p.copy()
        for _ in range(int(r) // 2 - 1):
            out *= p
        return out
    return p ** (r / 2.0)


def _lq(norms, weights, q):
    norms = np.asarray(norms, dtype=float)
    if q == math.inf:
        if weights is not None:
            norms = norms[np.asarray(weights) > 0]
        return float(norms.max())
    w = np.ones_like(norms) if weights is None else np.asarray(weights, dtype=float)
    # scale out the max to keep large q stable
    m = norms.max()
    if m == 0:
        return 0.0
    return float(m * np.sum(w * (norms / m) ** q) ** (1.0 / q))


def mixed_norm(slices: TimeSlices, q: float, r: float, spatial_window: float | None = None) -> float:
    """``(sum_i w_i ||F(., t_i)||_r**q)**(1/q)``; unit weights when none are attached.

    Examples
    --------
    >>> import numpy as np
    >>> v = np.ones((2, 8))
    >>> S = TimeSlices([0.0, 1.0], v, 1, 1.0, 8, weights=[0.5, 0.5])
    >>> round(mixed_norm(S, 2, 2), 12)
    1.414213562373
    """
    if q < 1 or r < 1:
        raise ConfigError(f"mixed norm needs q, r >= 1, got q={q}, r={r}")
    norms = lr_norms(slices.values, slices.d, slices.L, r, spatial_window)
    return _lq(norms, slices.weights, q)


def discrete_norm(values, q: float) -> float:
    """Unweighted ``l**q`` norm of a finite list."""
    return _lq(np.abs(np.asarray(values, dtype=float)), None, q)


def weak_norm(values, s: float) -> float:
    """``sup_m m**(1/s) a*_m`` over the decreasing rearrangement ``a*``.

    Examples
    --------
    >>> weak_norm([1, 1, 1, 1], 2)
    2.0
    """
    if not 1.0 < s < math.inf:
        raise ConfigError(f"weak norm exponent s = {s} must lie in (1, inf)")
    a = np.sort(np.abs(np.asarray(values, dtype=float)))[::-1]
    if a.size == 0:
        return 0.0
    m = np.arange(1, a.size + 1, dtype=float)
    return float(np.max(m ** (1.0 / s) * a))


def neighborhood_nodes(nb: Neighborhood, scale: float, nodes: int = 8):
    """Composite midpoint nodes and weights over the components of ``nb``.

    Each component gets ``max(nodes, ceil(nodes * length / (2 scale)))``
    nodes, i.e. at least ``nodes`` per length ``2 scale``.
    """
    if nodes < 1:
        raise ConfigError("need at least one quadrature node per component")
    ts, ws = [], []
    for a, b in zip(nb.starts, nb.ends):
        length = b - a
        n = max(nodes, int(math.ceil(nodes * length / (2.0 * scale) - 1e-9)))
        h = length / n
        ts.append(a + h * (np.arange(n) + 0.5))
        ws.append(np.full(n, h))
    return np.concatenate(ts), np.concatenate(ws)
