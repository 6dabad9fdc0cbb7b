"""Counterexamples: concentration-on-a-grid and the focusing tube."""

from fractime.exponents import ExponentConfig
from fractime.sharpness import necessity_conad, tube_constant

for q, r in ((2, 4), (4, 4)):
    rep = necessity_conad(ExponentConfig(1, 2, "1/2", q, r, 0), 10, [6, 8, 10, 12])
    print(f"(q,r)=({q},{r}): measured {rep.measured:.4f}, predicted {rep.predicted:.4f}")

for j, m in ((6, 2), (8, 6)):
    print(f"tube j={j} m={m}: constant {tube_constant(j, m, 2.0)['constant']:.4f}")
