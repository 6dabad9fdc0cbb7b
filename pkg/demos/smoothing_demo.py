"""Local smoothing on a fractal time set and the necessity of the threshold."""

import math

from fractime.localsmooth import smoothing_experiment
from fractime.reports import fit_slope
from fractime.sharpness import necessity_smoothing

rep = smoothing_experiment("cantor", 2.0, -0.25, range(4, 9), trials=4, seed=0, alpha=0.5)
slope = fit_slope([r.j for r in rep.rows], [math.log2(r.extra["target_ratio"]) for r in rep.rows]).slope
print("ratio against 2^(-j/4): slope", round(slope, 4))

# The bump example changes sign across s = -1/4.
for s in (-0.35, -0.15):
    print(f"s={s}: necessity slope {necessity_smoothing(2.0, [6, 8, 10, 12], s).measured:.4f}")
