# coding: utf-8

# # The factor map
#
# Averaging a tower function over the cells of each level, and scaling by
# mu_k^(1/p), gives a bilateral sequence. This map intertwines the
# composition operator with the derived weighted shift. This script checks
# the identity numerically on a distorted random tower and then lifts a
# sequence back.

import numpy as np

from towerdyn import (apply_composition, apply_shift, check_semiconjugacy, derive_weights,
                      factor_map, factor_norm_ratio, lift, p_norm, random_sequence,
                      random_tower_function, tower_from_profile)

rng = np.random.default_rng(7)
tower = tower_from_profile("random_distorted", window=64, cells=3, K=2.0, seed=7, p=2.0)
print(tower)

phi = random_tower_function(tower, rng, -20, 20)
w = derive_weights(tower)

lhs = factor_map(tower, apply_composition(tower, phi, 1))
rhs = apply_shift(w, factor_map(tower, phi), 1)
print("|| Pi(T phi) - B Pi(phi) || =", p_norm(lhs - rhs, tower.p))

# `check_semiconjugacy` repeats this along a stretch of the orbit.

report = check_semiconjugacy(tower, phi, n_steps=10)
print("max residual over 10 steps:", report.max_residual, "passed:", report.passed)

# Lifting spreads y_k evenly over the cells of level k. The lift has the same
# norm as y and the factor map sends it straight back.

y = random_sequence(rng, 64)
psi = lift(tower, y)
print("||y|| =", p_norm(y, tower.p), " ||lift(y)|| =", p_norm(psi))
print("round trip error:", p_norm(factor_map(tower, psi) - y, tower.p))

# Without distortion the factor map never increases norms. With K = 2 the
# ratio can exceed 1 and is only reported.

print("||Pi phi|| / ||phi|| =", factor_norm_ratio(tower, phi))
