"""Box-counting and Assouad characteristics of the middle-half Cantor set."""

from fractime.dimension import assouad_characteristic
from fractime.fracset import Cantor, covering_number

# Each generation keeps two intervals of length 4^-k, so N(2^-2k) = 2^k.
for k in range(1, 7):
    print(f"k={k}: N = {covering_number(Cantor(0.5, k), 2.0 ** (-2 * k))}")

# At alpha = 1/2 the sampled characteristic stays bounded as depth grows,
# while a smaller probe exponent makes it blow up.
for k in (4, 8, 12):
    plan = dict(window_exps=list(range(0, 2 * k + 1, 2)), delta_exps=list(range(0, 2 * k + 1, 2)))
    a = assouad_characteristic(Cantor(0.5, k), 0.5, **plan).sup_value
    b = assouad_characteristic(Cantor(0.5, k), 0.4, **plan).sup_value
    print(f"depth {k}: sup at 1/2 = {a:.3f}, sup at 0.4 = {b:.3f}")
