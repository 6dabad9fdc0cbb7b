"""Band-limited Strichartz ratios on a Cantor time set against a Lebesgue control."""

from fractime.exponents import ExponentConfig
from fractime.strichartz_hom import homogeneous_experiment

cantor = homogeneous_experiment(ExponentConfig(1, 2, "1/2", 4, 4, 0), range(4, 9), trials=10, seed=0)
print("Cantor (4,4), s=0: slope", round(cantor.slope, 4))

# Below the critical regularity the ratio grows with frequency.
below = homogeneous_experiment(ExponentConfig(1, 2, "1/2", 4, 4, "-1/4"), range(4, 9), trials=10, seed=0)
print("Cantor (4,4), s=-1/4: slope", round(below.slope, 4))
