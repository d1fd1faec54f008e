# coding: utf-8

# # Towers and shifts
#
# A measure tower is described by its level masses mu_k, the mass of the k-th
# image of a wandering set W. Each level may be split into cells. Here we
# build the standard geometric tower where every step away from W halves the
# mass.

import numpy as np

from towerdyn import (BilateralSequence, TowerFunction, apply_composition, apply_shift,
                      derive_weights, operator_norm_bound, p_norm, tower_from_profile, validate)

tower = tower_from_profile("geometric", window=64)
print(tower)
print("masses at levels -3..3:", tower.level_mass(np.arange(-3, 4)))

# `validate` returns the two boundedness constants and the observed
# distortion. Moving one level costs at most a factor 2 of mass in either
# direction, so c = d = 2.

c, d, k_eff = validate(tower)
print(f"c = {c}, d = {d}, distortion = {k_eff}")

# The composition operator moves a function's coefficient from level k+1 down
# to level k. Its norm is bounded by c^(1/p).

phi = TowerFunction.indicator(tower, [1])
psi = apply_composition(tower, phi, 1)
print("||phi|| =", p_norm(phi), " ||T phi|| =", p_norm(psi),
      " bound =", operator_norm_bound(tower)[0])

# The matching weighted shift has weights w_k = (mu_{k-1} / mu_k)^(1/p):
# 2 on the right of W and 1/2 on the left.

w = derive_weights(tower)
print("weights at -2..2:", w(np.arange(-2, 3)))

# Powers of the shift are evaluated in closed form from a prefix sum of log2
# weights. A power of 2000 would overflow if done by repeated multiplication
# of the intermediate values, but here it is exact.

x = BilateralSequence.unit(2000, window=4000, value=2.0 ** -1000)
print("B^2000 x =", apply_shift(w, x, 2000).to_dict())

# The sequence x_k = 2^-|k| is fixed by the shift. Truncating it to |k| <= 30
# only disturbs the two cut ends.

fixed = BilateralSequence.from_dict({k: 2.0 ** -abs(k) for k in range(-30, 31)}, 64)
print("B x - x on a truncated fixed point:", (apply_shift(w, fixed, 1) - fixed).to_dict())
