# coding: utf-8

# # Classifying towers
#
# `classify` runs two finite tests. The decay test looks for iterates that
# push a block of levels into a region of small mass on both sides. The
# series test asks whether the level masses sum to a finite total. Each
# property comes back with a verdict tied to the horizon that produced it.

from towerdyn import CriteriaConfig, build_periodic_point, classify, derive_weights, \
    hypercyclicity_criterion, tower_from_profile

for name in ("geometric", "flat", "harmonic"):
    tower = tower_from_profile(name, window=64)
    result = classify(tower)
    print(f"\n{name}")
    for flag, status in result.statuses().items():
        print(f"  {flag:26s} {status.value}")

# The geometric tower has block mass 3.5 * 2^-n at distance n, so for a block
# of radius 1 the first distance with mass below 0.1 is n = 6.

geo = tower_from_profile("geometric", window=64)
v = hypercyclicity_criterion(geo, [1], [0.1])
print("\nwitness for (N=1, eps=0.1):", v.witness)

# The harmonic tower decays, so it is recurrent and hypercyclic. Its masses
# 1/(|k|+1) sum to infinity, though, and the partial sums keep growing.

harm = classify(tower_from_profile("harmonic", window=64))
for row in harm.chaotic.diagnostics["partial_sums"]:
    print(f"  sum over |k| <= {row['K']:5d}: {row['sum']:.3f}")

# The periodic-point oracle gives the same answer from the shift side. The
# fixed point of the derived shift has finite norm exactly when the mass
# series converges.

for name in ("geometric", "harmonic"):
    w = derive_weights(tower_from_profile(name, window=64))
    pp = build_periodic_point(w, period=1, seed=1.0, horizon=900)
    print(f"{name}: residual {pp.residual}, partial norms stabilise: {pp.stabilizes}")

# Horizons and quantifier samples are explicit and can be changed.

custom = CriteriaConfig(N_list=(1, 3), eps_list=(0.05,), horizon=500)
print(classify(geo, custom).hypercyclic.diagnostics["pairs"])
