"""Exponent arithmetic and admissibility predicates.

All formulas are evaluated in reciprocal space with exact rationals
(:class:`fractions.Fraction`).  An infinite exponent is the sentinel
:data:`INF`, whose reciprocal is exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from ._errors import ConfigError, ExponentError

__all__ = [
    "INF",
    "quadrangle_Q",
    "Exponent",
    "as_exponent",
    "as_rational",
    "recip",
    "format_exponent",
    "ExponentConfig",
    "Verdict",
    "admissible",
    "s_gamma",
    "s_gamma_alpha",
    "r_star",
    "lambda_ab",
    "sigma_alpha",
    "lambda_alpha",
    "InhomExponents",
    "inhom_exponents",
    "convex_hull",
    "in_convex_polygon",
]


class _Infinity:
    """Singleton for an infinite Lebesgue exponent."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __float__(self):
        return float("inf")

    def __eq__(self, other):
        return other is self or (isinstance(other, float) and other == float("inf"))

    def __hash__(self):
        return hash("fractime-inf")

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __le__(self, other):
        return other is self

    def __ge__(self, other):
        return True

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
Exponent = Union[Fraction, _Infinity]


def as_rational(x) -> Fraction:
    """Convert ``x`` (int, Fraction, float, or ``"p/q"`` string) to a Fraction.

    Floats go through their shortest decimal representation so that
    ``0.1`` becomes ``1/10``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ExponentError(f"boolean is not a valid exponent: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ExponentError(f"non-finite value where a rational is required: {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ExponentError(f"cannot parse rational {x!r}") from exc
    raise ExponentError(f"unsupported numeric type {type(x).__name__}")


def as_exponent(x) -> Exponent:
    """Convert to a Lebesgue exponent, accepting ``"inf"`` and ``float('inf')``."""
    if x is INF:
        return INF
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    if isinstance(x, float) and x == float("inf"):
        return INF
    return as_rational(x)


def recip(p: Exponent) -> Fraction:
    """Return ``1/p`` with ``1/INF = 0``."""
    if p is INF:
        return Fraction(0)
    if p == 0:
        raise ExponentError("exponent 0 has no reciprocal")
    return 1 / p


def format_exponent(x) -> str:
    """Serialize an exponent as ``"p/q"``, ``"p"`` or ``"inf"``."""
    if x is INF:
        return "inf"
    x = as_rational(x)
    return str(x)


def _check_lebesgue(name: str, p: Exponent, lo: Fraction = Fraction(1)) -> None:
    if p is not INF and p < lo:
        raise ExponentError(f"{name} = {p} must lie in [{lo}, inf]")


@dataclass(frozen=True)
class ExponentConfig:
    """Exponent tuple ``(d, gamma, alpha, q, r, s)``.

    Parameters
    ----------
    d : int
        Spatial dimension, ``d >= 1``.
    gamma : rational
        Order of the dispersion relation; ``gamma == 1`` selects the wave branch.
    alpha : rational
        Fractal exponent in ``(0, 1]``.
    q, r : exponent
        Time and space Lebesgue exponents in ``[2, inf]``.
    s : rational
        Regularity.
    """

    d: int
    gamma: Fraction
    alpha: Fraction
    q: Exponent
    r: Exponent
    s: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "gamma", as_rational(self.gamma))
        object.__setattr__(self, "alpha", as_rational(self.alpha))
        object.__setattr__(self, "q", as_exponent(self.q))
        object.__setattr__(self, "r", as_exponent(self.r))
        object.__setattr__(self, "s", as_rational(self.s))
        if int(self.d) != self.d or self.d < 1:
            raise ExponentError(f"d = {self.d} must be a positive integer")
        object.__setattr__(self, "d", int(self.d))
        if self.gamma <= 0:
            raise ExponentError(f"gamma = {self.gamma} must be positive")
        if not (0 < self.alpha <= 1):
            raise ExponentError(f"alpha = {self.alpha} must lie in (0, 1]")
        _check_lebesgue("q", self.q, Fraction(2))
        _check_lebesgue("r", self.r, Fraction(2))
        if Fraction(self.d) / self.alpha == 2 and self.q == 2 and self.r is INF:
            raise ExponentError("excluded triple (d/alpha, q, r) = (2, 2, inf)")

    @property
    def branch(self) -> str:
        """``"wave"`` when ``gamma == 1``, otherwise ``"schrodinger"``."""
        return "wave" if self.gamma == 1 else "schrodinger"

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "gamma": format_exponent(self.gamma),
            "alpha": format_exponent(self.alpha),
            "q": format_exponent(self.q),
            "r": format_exponent(self.r),
            "s": format_exponent(self.s),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ExponentConfig":
        return cls(
            d=doc["d"],
            gamma=doc["gamma"],
            alpha=doc["alpha"],
            q=doc["q"],
            r=doc["r"],
            s=doc.get("s", 0),
        )

    def replace(self, **changes) -> "ExponentConfig":
        kw = dict(d=self.d, gamma=self.gamma, alpha=self.alpha, q=self.q, r=self.r, s=self.s)
        kw.update(changes)
        return ExponentConfig(**kw)


@dataclass(frozen=True)
class Verdict:
    """Three-valued admissibility verdict with its margin."""

    status: str
    margin: Fraction

    def to_json(self) -> dict:
        return {"status": self.status, "margin": format_exponent(self.margin)}


def _effective_dim(cfg: ExponentConfig) -> Fraction:
    return Fraction(cfg.d - 1) if cfg.branch == "wave" else Fraction(cfg.d)


def admissible(cfg: ExponentConfig) -> Verdict:
    """Evaluate ``(d/2)(1/2 - 1/r) >= alpha/q``.

    The wave branch uses ``(d-1)/2`` in place of ``d/2``.

    Returns
    -------
    Verdict
        ``status`` is ``"strict"``, ``"boundary"`` or ``"fail"``; ``margin`` is
        the left side minus the right side.
    """
    de = _effective_dim(cfg)
    margin = de / 2 * (Fraction(1, 2) - recip(cfg.r)) - cfg.alpha * recip(cfg.q)
    if margin > 0:
        status = "strict"
    elif margin == 0:
        status = "boundary"
    else:
        status = "fail"
    return Verdict(status, margin)


def s_gamma(cfg: ExponentConfig) -> Fraction:
    """Regularity threshold ``d/2 - d/r - gamma/q`` for the set form."""
    d = Fraction(cfg.d)
    return d / 2 - d * recip(cfg.r) - cfg.gamma * recip(cfg.q)


def s_gamma_alpha(cfg: ExponentConfig) -> Fraction:
    """Regularity threshold ``d/2 - d/r - gamma*alpha/q`` for the measure form."""
    d = Fraction(cfg.d)
    return d / 2 - d * recip(cfg.r) - cfg.gamma * cfg.alpha * recip(cfg.q)


def r_star(d, alpha) -> Fraction:
    """Endpoint exponent ``2d/(d - 2 alpha)``, defined for ``d > 2 alpha``."""
    d = as_rational(d)
    alpha = as_rational(alpha)
    if d <= 2 * alpha:
        raise ExponentError(f"r_* undefined: need d > 2 alpha, got d={d}, alpha={alpha}")
    return 2 * d / (d - 2 * alpha)


def lambda_ab(d, a, b) -> Fraction:
    """``(d/2)(1 - 1/a - 1/b)``."""
    d = as_rational(d)
    return d / 2 * (1 - recip(as_exponent(a)) - recip(as_exponent(b)))


def sigma_alpha(d, gamma, alpha, rt, r, qt, q) -> Fraction:
    """Scaling defect ``d(1 - 1/rt - 1/r) - gamma (alpha/qt + alpha/q)``."""
    d, gamma, alpha = as_rational(d), as_rational(gamma), as_rational(alpha)
    rt, r, qt, q = (as_exponent(x) for x in (rt, r, qt, q))
    return d * (1 - recip(rt) - recip(r)) - gamma * (alpha * recip(qt) + alpha * recip(q))


def lambda_alpha(d, alpha, rt, r, qt, q) -> Fraction:
    """Band decay rate ``(d/2)(1 - 1/rt - 1/r) - (alpha/qt + alpha/q)``."""
    d, alpha = as_rational(d), as_rational(alpha)
    rt, r, qt, q = (as_exponent(x) for x in (rt, r, qt, q))
    return d / 2 * (1 - recip(rt) - recip(r)) - (alpha * recip(qt) + alpha * recip(q))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points):
    """Monotone-chain convex hull, counter-clockwise, collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def in_convex_polygon(point, hull) -> bool:
    """Closed membership test for a counter-clockwise convex polygon."""
    if len(hull) == 0:
        return False
    if len(hull) == 1:
        return tuple(point) == tuple(hull[0])
    if len(hull) == 2:
        a, b = hull
        if _cross(a, b, point) != 0:
            return False
        return (min(a[0], b[0]) <= point[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= point[1] <= max(a[1], b[1]))
    n = len(hull)
    return all(_cross(hull[i], hull[(i + 1) % n], point) >= 0 for i in range(n))


def _swap(p):
    return (p[1], p[0])


@dataclass(frozen=True)
class InhomExponents:
    """Exponents of an inhomogeneous estimate and their region geometry.

    Attributes
    ----------
    sigma, lam : Fraction
        Scaling defect and band decay rate.
    vertices : dict
        ``O, D, A, A', C, C'`` as rational pairs (``C`` is ``None`` when
        undefined); ``D`` is ``(1/2, 1/2)``.
    in_Q, in_H : bool
        Closed membership of ``(1/rt, 1/r)``.
    at_C : bool
        The point equals ``C`` or ``C'``.
    q_range_ok : bool
        The admissible time-exponent range holds.
    out_of_scope : bool
        ``d <= gamma*alpha``; vertex ``C`` is outside the covered parameter set.
    label : str
        ``"covered"``, ``"vertex-unclaimed"``, ``"outside-hypotheses"`` or
        ``"out-of-region"``.
    """

    d: int
    gamma: Fraction
    alpha: Fraction
    rt: Exponent
    r: Exponent
    qt: Exponent
    q: Exponent
    sigma: Fraction
    lam: Fraction
    vertices: dict = field(repr=False)
    Q_hull: tuple = field(repr=False)
    H_hull: tuple = field(repr=False)
    in_Q: bool = False
    in_H: bool = False
    at_C: bool = False
    q_range_ok: bool = False
    out_of_scope: bool = False
    label: str = ""

    @property
    def point(self):
        return (recip(self.rt), recip(self.r))

    def to_json(self) -> dict:
        def fmt(p):
            return None if p is None else [format_exponent(p[0]), format_exponent(p[1])]

        return {
            "d": self.d,
            "gamma": format_exponent(self.gamma),
            "alpha": format_exponent(self.alpha),
            "rt": format_exponent(self.rt),
            "r": format_exponent(self.r),
            "qt": format_exponent(self.qt),
            "q": format_exponent(self.q),
            "sigma": format_exponent(self.sigma),
            "lambda": format_exponent(self.lam),
            "vertices": {k: fmt(v) for k, v in self.vertices.items()},
            "in_Q": self.in_Q,
            "in_H": self.in_H,
            "at_C": self.at_C,
            "q_range_ok": self.q_range_ok,
            "out_of_scope": self.out_of_scope,
            "label": self.label,
        }


def quadrangle_Q(d, alpha):
    """Counter-clockwise vertex list of the closed quadrangle ``hull(O, D, A, A')``."""
    d, alpha = Fraction(int(d)), as_rational(alpha)
    half = Fraction(1, 2)
    A = (half, max(Fraction(0), (d - 2 * alpha) / (2 * d)))
    return tuple(convex_hull([(Fraction(0), Fraction(0)), (half, half), A, _swap(A)]))


def q_range_ok(d, alpha, rt, r, qt, q) -> bool:
    """Check the admissible range of ``(1/q, 1/qt')`` for given space exponents."""
    d, alpha = as_rational(d), as_rational(alpha)
    irt, ir = recip(as_exponent(rt)), recip(as_exponent(r))
    iq = recip(as_exponent(q))
    iqt_dual = 1 - recip(as_exponent(qt))
    c = d / (2 * alpha)
    ok = True
    if ir >= irt:
        ok &= 0 <= iq <= iqt_dual <= 1 - c * (ir - irt)
    if ir <= irt:
        ok &= c * (irt - ir) <= iq <= iqt_dual <= 1
    return bool(ok)


def inhom_exponents(d, gamma, alpha, rt, r, qt, q) -> InhomExponents:
    """Derived exponents and region membership for ``(rt, r, qt, q)``.

    Examples
    --------
    >>> e = inhom_exponents(3, 2, 1, 4, 4, 4, 4)
    >>> e.vertices["A"], e.vertices["C"]
    ((Fraction(1, 2), Fraction(1, 6)), (Fraction(1, 4), Fraction(1, 12)))
    """
    d_int = int(d)
    d = Fraction(d_int)
    gamma, alpha = as_rational(gamma), as_rational(alpha)
    rt, r, qt, q = (as_exponent(x) for x in (rt, r, qt, q))
    for name, p in (("rt", rt), ("r", r), ("qt", qt), ("q", q)):
        _check_lebesgue(name, p, Fraction(2))
    if not (0 < alpha <= 1):
        raise ExponentError(f"alpha = {alpha} must lie in (0, 1]")

    half = Fraction(1, 2)
    O = (Fraction(0), Fraction(0))
    D = (half, half)
    A = (half, max(Fraction(0), (d - 2 * alpha) / (2 * d)))
    if d != alpha:
        C = ((d - gamma * alpha) / (2 * (d - alpha)),
             (d - 2 * alpha) * (d - gamma * alpha) / (2 * d * (d - alpha)))
    else:
        C = None
    vertices = {"O": O, "D": D, "A": A, "A'": _swap(A),
                "C": C, "C'": None if C is None else _swap(C)}
    Q_hull = tuple(convex_hull([O, D, A, _swap(A)]))
    H_pts = [D, A, _swap(A)] + ([] if C is None else [C, _swap(C)])
    H_hull = tuple(convex_hull(H_pts))

    pt = (recip(rt), recip(r))
    in_Q = in_convex_polygon(pt, Q_hull)
    in_H = in_convex_polygon(pt, H_hull)
    at_C = C is not None and (pt == C or pt == _swap(C))
    qok = q_range_ok(d, alpha, rt, r, qt, q)
    out_of_scope = d <= gamma * alpha

    if out_of_scope or gamma < 2 or r is INF or rt is INF:
        label = "outside-hypotheses"
    elif at_C:
        label = "vertex-unclaimed"
    elif in_H and qok:
        label = "covered"
    else:
        label = "out-of-region"

    return InhomExponents(
        d=d_int, gamma=gamma, alpha=alpha, rt=rt, r=r, qt=qt, q=q,
        sigma=sigma_alpha(d, gamma, alpha, rt, r, qt, q),
        lam=lambda_alpha(d, alpha, rt, r, qt, q),
        vertices=vertices, Q_hull=Q_hull, H_hull=H_hull,
        in_Q=in_Q, in_H=in_H, at_C=at_C, q_range_ok=qok,
        out_of_scope=out_of_scope, label=label,
    )
