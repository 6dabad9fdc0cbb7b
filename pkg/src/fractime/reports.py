"""Experiment report containers and log-log slope fitting."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._errors import InsufficientDataError

__all__ = ["SlopeFit", "fit_slope", "RatioRow", "RatioReport", "dumps", "config_hash", "write_csv"]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float
    n: int

    def to_json(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "residual": self.residual, "n": self.n}


def fit_slope(x, y, min_points: int = 3) -> SlopeFit:
    """Least-squares line ``y ~ slope * x + intercept``.

    ``residual`` is the root-mean-square deviation from the fitted line.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < min_points:
        raise InsufficientDataError(f"need at least {min_points} scales to fit a slope, got {x.size}")
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sqrt(np.mean((A @ [slope, intercept] - y) ** 2)))
    return SlopeFit(float(slope), float(intercept), res, int(x.size))


@dataclass(frozen=True)
class RatioRow:
    j: int
    ratio: float
    numerator: float
    denominator: float
    seed: int
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        doc = {"j": self.j, "ratio": self.ratio, "numerator": self.numerator,
               "denominator": self.denominator, "seed": self.seed}
        doc.update(self.extra)
        return doc


@dataclass(frozen=True)
class RatioReport:
    """Per-scale ratios with a log2 growth slope.

    ``rows[i].ratio`` is the maximum over trials at scale ``rows[i].j``;
    ``fit`` regresses ``log2(ratio)`` on ``j``.  Max-over-trials is a lower
    estimate of the operator norm at each scale.
    """

    name: str
    config: dict
    rows: tuple
    fit: SlopeFit
    meta: dict = field(default_factory=dict)

    @classmethod
    def build(cls, name, config, rows, meta=None, min_scales: int = 4, x=None):
        rows = tuple(rows)
        xs = [r.j for r in rows] if x is None else x
        fit = fit_slope(xs, [math.log2(r.ratio) for r in rows], min_points=min_scales)
        return cls(name, dict(config), rows, fit, dict(meta or {}))

    @property
    def slope(self) -> float:
        return self.fit.slope

    @property
    def constant(self) -> float:
        return max(r.ratio for r in self.rows)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "config": self.config,
            "rows": [r.to_json() for r in self.rows],
            "fit": self.fit.to_json(),
            "constant": self.constant,
            "meta": self.meta,
        }

    def csv_rows(self):
        header = ["j", "ratio", "numerator", "denominator", "seed"]
        return header, [[r.j, r.ratio, r.numerator, r.denominator, r.seed] for r in self.rows]


def _default(obj: Any):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return str(obj)


def dumps(doc) -> str:
    """Canonical JSON: sorted keys, fixed separators, repr-exact floats."""
    return json.dumps(doc, sort_keys=True, indent=2, default=_default, allow_nan=True) + "\n"


def config_hash(doc) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"), default=_default)
    return hashlib.sha256(blob.encode()).hexdigest()


def write_csv(path, header, rows) -> None:
    """RFC-4180 CSV (CRLF line endings, minimal quoting)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
