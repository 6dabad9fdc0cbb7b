"""Fractal subsets of the real line.

A :class:`FractalSet` is a generator description (Cantor set, power
sequence, explicit points, affine image, union).  Every generator is
realized as a finite union of closed intervals together with one
representative point per interval.  ``resolution`` is the largest scale
at which the realization stands in faithfully for the described set;
queries below it raise :class:`ResolutionError`.

Covering numbers and neighborhoods are computed exactly on the interval
union.  Separated subsets are drawn from the representative points.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._errors import ConfigError, ResolutionError, SchemaError

__all__ = [
    "FractalSet",
    "Cantor",
    "PowerSequence",
    "Explicit",
    "AffineImage",
    "Union",
    "SeparatedSet",
    "Neighborhood",
    "MAX_CANTOR_RATIO",
    "cantor_endpoints",
    "covering_number",
    "neighborhood",
    "separated_subset",
    "set_from_json",
    "export_points_csv",
    "read_points_csv",
]

# depth guard: smallest Cantor interval is 2**-(k/alpha) >= 2**-40
MAX_CANTOR_RATIO = 40.0

# relative slack for float comparisons against a covering length
_COVER_TOL = 1e-9


class FractalSet:
    """Base class of all set generators.

    Subclasses implement ``_realize`` returning sorted, disjoint closed
    intervals ``(starts, ends)`` and representative points.
    """

    kind = "abstract"

    def __init__(self):
        self._cache = None

    def _realize(self):
        raise NotImplementedError

    def _get(self):
        if self._cache is None:
            starts, ends, points = self._realize()
            self._cache = (
                np.ascontiguousarray(starts, dtype=float),
                np.ascontiguousarray(ends, dtype=float),
                np.ascontiguousarray(points, dtype=float),
            )
        return self._cache

    def intervals(self):
        """Return ``(starts, ends)`` of the realizing closed intervals."""
        s, e, _ = self._get()
        return s, e

    def points(self) -> np.ndarray:
        """Strictly increasing representative points."""
        return self._get()[2]

    @property
    def resolution(self) -> float:
        raise NotImplementedError

    @property
    def bounds(self):
        """Interval hull ``(lo, hi)``."""
        s, e, _ = self._get()
        return float(s[0]), float(e[-1])

    def refine(self, resolution: float) -> "FractalSet":
        """Return a realization of the same set with at least the given resolution."""
        if self.resolution <= resolution:
            return self
        raise ResolutionError(
            f"{self.kind} set cannot be refined to resolution {resolution:g}"
        )

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({json.dumps(self.to_json())})"

    def __len__(self):
        return len(self.points())


class Cantor(FractalSet):
    """Cantor set of dimension ``alpha`` realized by its step-``depth`` intervals.

    Step 0 is ``[0, 1]``; each step keeps the two outer subintervals of
    relative length ``2**(-1/alpha)``, so step ``k`` has ``2**k`` intervals
    of length ``2**(-k/alpha)``.  Representatives are right endpoints.
    """

    kind = "cantor"

    def __init__(self, alpha: float, depth: int):
        super().__init__()
        alpha = float(alpha)
        depth = int(depth)
        if not (0.0 < alpha < 1.0):
            raise ConfigError(f"Cantor alpha = {alpha} must lie in (0, 1)")
        if depth < 0:
            raise ConfigError(f"Cantor depth = {depth} must be >= 0")
        if depth / alpha > MAX_CANTOR_RATIO:
            kmax = int(math.floor(MAX_CANTOR_RATIO * alpha))
            raise ResolutionError(
                f"depth guard violated: depth/alpha = {depth / alpha:.3f} > {MAX_CANTOR_RATIO:g}; "
                f"maximum admissible depth for alpha={alpha} is {kmax}"
            )
        self.alpha = alpha
        self.depth = depth

    def _realize(self):
        lefts = np.zeros(1)
        for m in range(self.depth):
            shift = 2.0 ** (-m / self.alpha) - 2.0 ** (-(m + 1) / self.alpha)
            lefts = np.stack([lefts, lefts + shift], axis=1).ravel()
        length = 2.0 ** (-self.depth / self.alpha)
        rights = lefts + length
        rights[-1] = 1.0
        return lefts, rights, rights

    @property
    def length(self) -> float:
        return 2.0 ** (-self.depth / self.alpha)

    @property
    def resolution(self) -> float:
        return self.length

    def refine(self, resolution: float) -> "Cantor":
        if self.resolution <= resolution:
            return self
        k = int(math.ceil(self.alpha * math.log2(1.0 / resolution) - 1e-12))
        return Cantor(self.alpha, max(k, self.depth))

    def to_json(self) -> dict:
        return {"kind": "cantor", "alpha": self.alpha, "depth": self.depth}


class PowerSequence(FractalSet):
    """The sequence ``{n**-a : n >= 1}``.

    The first ``count`` terms are kept as points; the tail together with
    the limit point 0 is realized by the closed interval ``[0, count**-a]``.
    """

    kind = "power"

    def __init__(self, a: float, count: int):
        super().__init__()
        if a <= 0:
            raise ConfigError(f"power exponent a = {a} must be positive")
        if count < 1:
            raise ConfigError(f"count = {count} must be >= 1")
        self.a = float(a)
        self.count = int(count)

    @classmethod
    def for_resolution(cls, a: float, resolution: float) -> "PowerSequence":
        """Smallest count whose tail interval is no longer than ``resolution``."""
        count = int(math.ceil(resolution ** (-1.0 / a) - 1e-9))
        return cls(a, max(count, 1))

    def _realize(self):
        n = np.arange(self.count, 0, -1, dtype=float)
        pts = n ** (-self.a)
        starts = pts.copy()
        starts[0] = 0.0
        return starts, pts, pts

    @property
    def resolution(self) -> float:
        return float(self.count) ** (-self.a)

    def refine(self, resolution: float) -> "PowerSequence":
        if self.resolution <= resolution:
            return self
        return PowerSequence.for_resolution(self.a, resolution)

    def to_json(self) -> dict:
        return {"kind": "power", "a": self.a, "count": self.count}


class Explicit(FractalSet):
    """A finite point set, optionally tagged as a proxy with a given resolution."""

    kind = "explicit"

    def __init__(self, points: Sequence[float], resolution: float = 0.0):
        super().__init__()
        pts = np.unique(np.asarray(points, dtype=float))
        if pts.size == 0:
            raise ConfigError("explicit set needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ConfigError("explicit points must be finite")
        self._points = pts
        self._resolution = float(resolution)

    @classmethod
    def grid(cls, lo: float, hi: float, spacing: float) -> "Explicit":
        """Uniform grid proxy for ``[lo, hi]`` with the given spacing."""
        n = int(round((hi - lo) / spacing))
        return cls(lo + spacing * np.arange(n + 1), resolution=spacing)

    def _realize(self):
        return self._points, self._points, self._points

    @property
    def resolution(self) -> float:
        return self._resolution

    def to_json(self) -> dict:
        doc = {"kind": "explicit", "points": [float(p) for p in self._points]}
        if self._resolution:
            doc["resolution"] = self._resolution
        return doc


class AffineImage(FractalSet):
    """Image of ``base`` under ``t -> scale * t + shift``."""

    kind = "affine"

    def __init__(self, base: FractalSet, scale: float, shift: float = 0.0):
        super().__init__()
        if scale == 0:
            raise ConfigError("affine scale must be nonzero")
        self.base = base
        self.scale = float(scale)
        self.shift = float(shift)

    def _realize(self):
        s, e = self.base.intervals()
        p = self.base.points()
        a, b = self.scale, self.shift
        if a > 0:
            return a * s + b, a * e + b, a * p + b
        return (a * e + b)[::-1], (a * s + b)[::-1], (a * p + b)[::-1]

    @property
    def resolution(self) -> float:
        return abs(self.scale) * self.base.resolution

    def refine(self, resolution: float) -> "AffineImage":
        if self.resolution <= resolution:
            return self
        return AffineImage(self.base.refine(resolution / abs(self.scale)), self.scale, self.shift)

    def to_json(self) -> dict:
        return {"kind": "affine", "base": self.base.to_json(),
                "scale": self.scale, "shift": self.shift}


class Union(FractalSet):
    """Union of finitely many sets; overlapping intervals are merged."""

    kind = "union"

    def __init__(self, parts: Sequence[FractalSet]):
        super().__init__()
        if len(parts) == 0:
            raise ConfigError("union needs at least one part")
        self.parts = list(parts)

    def _realize(self):
        s = np.concatenate([p.intervals()[0] for p in self.parts])
        e = np.concatenate([p.intervals()[1] for p in self.parts])
        order = np.lexsort((e, s))
        s, e = s[order], e[order]
        ms, me = [s[0]], [e[0]]
        for a, b in zip(s[1:], e[1:]):
            if a <= me[-1]:
                me[-1] = max(me[-1], b)
            else:
                ms.append(a)
                me.append(b)
        pts = np.unique(np.concatenate([p.points() for p in self.parts]))
        return np.array(ms), np.array(me), pts

    @property
    def resolution(self) -> float:
        return max(p.resolution for p in self.parts)

    def refine(self, resolution: float) -> "Union":
        if self.resolution <= resolution:
            return self
        return Union([p.refine(resolution) for p in self.parts])

    def to_json(self) -> dict:
        return {"kind": "union", "parts": [p.to_json() for p in self.parts]}


def set_from_json(doc: dict) -> FractalSet:
    """Rebuild a set from its JSON descriptor."""
    try:
        kind = doc["kind"]
        if kind == "cantor":
            return Cantor(doc["alpha"], doc["depth"])
        if kind == "power":
            if "count" in doc:
                return PowerSequence(doc["a"], doc["count"])
            return PowerSequence.for_resolution(doc["a"], doc["resolution"])
        if kind == "explicit":
            return Explicit(doc["points"], doc.get("resolution", 0.0))
        if kind == "affine":
            return AffineImage(set_from_json(doc["base"]), doc["scale"], doc.get("shift", 0.0))
        if kind == "union":
            return Union([set_from_json(p) for p in doc["parts"]])
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed set descriptor: missing or invalid field {exc}") from exc
    raise SchemaError(f"unknown set kind {doc.get('kind')!r}")


def export_points_csv(E: FractalSet, path) -> None:
    """Write representative points, one per line, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        for p in E.points():
            fh.write(f"{p:.17g}\r\n")


def read_points_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        return np.array([float(row[0]) for row in csv.reader(fh) if row], dtype=float)


def cantor_endpoints(alpha: float, k: int) -> Cantor:
    """Step-``k`` realization of the Cantor set of dimension ``alpha``.

    Examples
    --------
    >>> s, e = cantor_endpoints(0.5, 1).intervals()
    >>> list(zip(s, e))
    [(0.0, 0.25), (0.75, 1.0)]
    """
    return Cantor(alpha, k)


def _check_scale(E: FractalSet, scale: float, what: str, factor: float = 1.0) -> None:
    if not scale > 0:
        raise ConfigError(f"{what} must be positive, got {scale}")
    if E.resolution > factor * scale * (1 + _COVER_TOL):
        raise ResolutionError(
            f"{E.kind} realization has resolution {E.resolution:.6g}, too coarse for "
            f"{what} = {scale:.6g}; refine the set first"
        )


def _clip(starts, ends, window):
    if window is None:
        return starts, ends
    lo, hi = window
    i0 = int(np.searchsorted(ends, lo, side="left"))
    i1 = int(np.searchsorted(starts, hi, side="right"))
    if i1 <= i0:
        return starts[:0], ends[:0]
    s = np.maximum(starts[i0:i1], lo)
    e = np.minimum(ends[i0:i1], hi)
    return s, e


def _greedy_cover(starts, ends, delta) -> int:
    # leftmost-uncovered sweep over sorted disjoint closed intervals
    n = len(starts)
    tol = _COVER_TOL * delta
    count = 0
    covered = -math.inf
    i = 0
    while True:
        i = int(np.searchsorted(ends, covered + tol, side="right"))
        if i >= n:
            return count
        pos = max(float(starts[i]), covered)
        k = max(1, int(math.ceil((float(ends[i]) - pos) / delta - _COVER_TOL)))
        count += k
        covered = pos + k * delta


def covering_number(E: FractalSet, delta: float, window=None) -> int:
    """Minimal number of closed intervals of length ``delta`` covering ``E ∩ window``.

    Parameters
    ----------
    E : FractalSet
        Must be realized at resolution ``<= delta``.
    delta : float
        Covering length.
    window : tuple of float, optional
        Closed interval ``(lo, hi)``; the whole set if omitted.

    Raises
    ------
    ResolutionError
        If the realization is coarser than ``delta``.
    """
    _check_scale(E, delta, "delta")
    s, e = _clip(*E.intervals(), window)
    return _greedy_cover(s, e, float(delta))


@dataclass(frozen=True)
class Neighborhood:
    """Disjoint open intervals forming ``{x : dist(x, E) < delta}``."""

    starts: np.ndarray
    ends: np.ndarray
    delta: float

    @property
    def total_length(self) -> float:
        return float(np.sum(self.ends - self.starts))

    def __len__(self):
        return len(self.starts)

    def as_list(self):
        return [(float(a), float(b)) for a, b in zip(self.starts, self.ends)]

    def contains(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        i = np.searchsorted(self.starts, t, side="right") - 1
        ok = i >= 0
        ic = np.clip(i, 0, None)
        return ok & (t > self.starts[ic]) & (t < self.ends[ic])


def neighborhood(E: FractalSet, delta: float) -> Neighborhood:
    """Open ``delta``-neighborhood of ``E`` as merged disjoint open intervals.

    Requires resolution ``<= 2 delta``, so that each realizing interval is
    already inside the neighborhood of its own endpoints.
    """
    _check_scale(E, delta, "delta", factor=2.0)
    s, e = E.intervals()
    lo = s - delta
    hi = e + delta
    # open intervals merge when they overlap; touching ones stay apart
    brk = np.nonzero(lo[1:] >= hi[:-1])[0]
    first = np.concatenate([[0], brk + 1])
    last = np.concatenate([brk, [len(lo) - 1]])
    return Neighborhood(lo[first].copy(), hi[last].copy(), float(delta))


@dataclass(frozen=True)
class SeparatedSet:
    """Maximally separated subset ``{tau}`` of representative points."""

    points: np.ndarray
    spacing: float
    j: int
    gamma: float

    @property
    def intervals(self):
        """Open intervals ``(tau - 2 spacing, tau + 2 spacing)`` as two arrays."""
        w = 2.0 * self.spacing
        return self.points - w, self.points + w

    def __len__(self):
        return len(self.points)


def _greedy_separate(pts: np.ndarray, spacing: float) -> np.ndarray:
    keep = []
    n = len(pts)
    i = 0
    while i < n:
        last = pts[i]
        keep.append(i)
        k = int(np.searchsorted(pts, last + spacing, side="left"))
        while k < n and pts[k] - last < spacing:
            k += 1
        while k - 1 > i and pts[k - 1] - last >= spacing:
            k -= 1
        i = k
    return pts[np.array(keep, dtype=int)]


def separated_subset(E: FractalSet, gamma: float, j: int, spacing: float | None = None) -> SeparatedSet:
    """Greedy maximally ``2**(-gamma j)``-separated subset of the representatives.

    A point is kept iff it is at least ``spacing`` to the right of the last
    kept point.  ``spacing`` overrides ``2**(-gamma j)`` when given.
    """
    if spacing is None:
        spacing = 2.0 ** (-gamma * j)
    _check_scale(E, spacing, "spacing")
    return SeparatedSet(_greedy_separate(E.points(), float(spacing)), float(spacing), int(j), float(gamma))
