# coding: utf-8

# # Return times and their densities
#
# For a vector x and a radius delta, the return times are the n with
# ||T^n x - x|| < delta. Frequent recurrence asks for positive lower density
# of these times. Reiterative recurrence asks for positive upper Banach
# density.

import numpy as np

from towerdyn import (HitSet, WeightSequence, build_periodic_point, frequent_recurrence_evidence,
                      lower_density, orbit_distances, upper_banach_density)
from towerdyn.profiles import Step

# A set of multiples of q has both densities equal to 1/q.

H = 10_000
for q in (2, 3, 5, 7):
    h = HitSet.from_iterable(range(q, H + 1, q), H)
    print(f"q = {q}: lower {lower_density(h).value:.4f}, "
          f"upper Banach {upper_banach_density(h).value:.4f}")

# Blocks [2^k, 2^k + k] are long runs that get sparser and sparser. The
# lower density tends to 0 while short windows can still be filled.

H = 2 ** 16
blocks = {n for k in range(17) for n in range(2 ** k, 2 ** k + k + 1) if n <= H}
h = HitSet.from_iterable(blocks, H)
print("blocks: lower", lower_density(h).value)
ub = upper_banach_density(h, [4, 8, 16, 64])
print("blocks: best window rate by length", dict(zip(ub.argument.tolist(), ub.profile.tolist())))

# Orbit evidence: a period-3 point of the geometric shift returns exactly at
# every third step, so its return times have density 1/3 at any radius.

w = WeightSequence(Step(0.5, 2.0), 400)
x, residual = build_periodic_point(w, period=3, seed=1.0, horizon=300)
d = orbit_distances(w, x.restrict(-200, 200), 12, p=1.0)
print("distances:", np.array2string(d, precision=2))

# The point is cut at |k| <= 300. Shifting by n exposes the cut by about
# 2^-(300 - n), so orbits are only meaningful well inside that range.

ev = frequent_recurrence_evidence(w, x, n_max=150, p=1.0)
print(ev.evidence.value, [round(r.lower_density, 4) for r in ev.per_delta])
