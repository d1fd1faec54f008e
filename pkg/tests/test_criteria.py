from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from towerdyn import (Classification, CriteriaConfig, InvariantViolation, Status,
                      ValidationError, Verdict, WeightSequence, WindowError,
                      build_periodic_point, chaos_criterion, classify, derive_weights,
                      hypercyclicity_criterion, recurrence_criterion, tower_from_profile,
                      tower_from_weights)
from towerdyn.criteria import mass_chain, partial_norms_stabilize, admissible_radius
from towerdyn.profiles import Constant, Step


def first_witness(mass, N, eps, horizon):
    """Smallest n in (2N, horizon] with both block sums below eps, exact rationals."""
    for n in range(2 * N + 1, horizon + 1):
        fwd = sum(mass(k) for k in range(n - N, n + N + 1))
        bwd = sum(mass(k) for k in range(-n - N, -n + N + 1))
        if fwd < eps and bwd < eps:
            return n
    return None


def test_geometric_witness_is_six(geometric):
    # block mass at level n is 2^-(n-1) + 2^-n + 2^-(n+1) = 3.5 * 2^-n
    assert 3.5 * 2.0 ** -5 >= 0.1 > 3.5 * 2.0 ** -6
    v = hypercyclicity_criterion(geometric, [1], [0.1], horizon=60)
    assert v.status is Status.SATISFIED and v.witness == 6


def test_geometric_witnesses_match_rational_oracle(geometric):
    v = hypercyclicity_criterion(geometric, horizon=200)
    mass = lambda k: Fraction(1, 2 ** abs(k))
    for pair in v.diagnostics["pairs"]:
        want = first_witness(mass, pair["N"], Fraction(pair["eps"]), 200)
        assert pair["witness"] == want
    assert v.witness == max(p["witness"] for p in v.diagnostics["pairs"])


def test_flat_tower_fails(flat):
    for eps in (2.9, 1.0, 0.1):
        v = hypercyclicity_criterion(flat, [1], [eps], horizon=100)
        assert v.status is Status.FAILED and v.witness is None
    assert hypercyclicity_criterion(flat, [1], [3.5], horizon=100).witness == 3


def test_harmonic_witness_is_thirty(harmonic):
    mass = lambda k: Fraction(1, abs(k) + 1)
    assert first_witness(mass, 1, Fraction(1, 10), 100) == 30
    v = hypercyclicity_criterion(harmonic, [1], [0.1], horizon=100)
    assert v.witness == 30


def test_recurrence_matches_hypercyclicity(harmonic):
    a = recurrence_criterion(harmonic, horizon=1000)
    b = hypercyclicity_criterion(harmonic, horizon=1000)
    assert a.status == b.status and a.witness == b.witness


@pytest.mark.parametrize("kwargs", [
    {"N_list": [], "eps_list": [0.1]},
    {"N_list": [1], "eps_list": []},
    {"N_list": [1], "eps_list": [float("inf")]},
    {"N_list": [1], "eps_list": [0.0]},
    {"N_list": [1], "eps_list": [-1.0]},
    {"N_list": [8], "eps_list": [0.1], "horizon": 16},
])
def test_criterion_input_validation(geometric, kwargs):
    with pytest.raises(ValidationError):
        hypercyclicity_criterion(geometric, **kwargs)


def test_table_tower_horizon_limit():
    tower = tower_from_profile({"kind": "custom", "masses": [2.0 ** -abs(k) for k in range(-40, 41)]}, 40)
    with pytest.raises(WindowError):
        hypercyclicity_criterion(tower, [1], [0.1], horizon=40)
    assert hypercyclicity_criterion(tower, [1], [0.1]).horizon == 39


def test_witness_monotone_in_eps_and_N():
    for ratio in (0.3, 0.5, 0.8):
        tower = tower_from_profile({"kind": "geometric", "ratio": ratio}, 64)
        pairs = hypercyclicity_criterion(tower, [1, 2, 4, 8], [1e-1, 1e-2, 1e-3],
                                         horizon=2000).diagnostics["pairs"]
        table = {(p["N"], p["eps"]): p["witness"] for p in pairs}
        for N in (1, 2, 4, 8):
            ws = [table[(N, e)] for e in (1e-1, 1e-2, 1e-3)]
            assert ws == sorted(ws)


def test_chaos_examples(geometric, flat, harmonic):
    assert chaos_criterion(geometric).status is Status.SATISFIED
    assert chaos_criterion(flat).status is Status.FAILED
    v = chaos_criterion(harmonic)
    assert v.status is Status.UNDETERMINED
    sums = [s["sum"] for s in v.diagnostics["partial_sums"]]
    assert all(b > a for a, b in zip(sums, sums[1:]))


def test_constant_weight_two_tower_is_not_chaotic():
    tower = tower_from_weights(WeightSequence(Constant(2.0), 64))
    assert tower.level_mass([-3, 0, 3]).tolist() == [8.0, 1.0, 0.125]
    assert chaos_criterion(tower).status is Status.FAILED


def test_chaos_rejects_bad_threshold(geometric):
    with pytest.raises(ValidationError):
        chaos_criterion(geometric, ratio_threshold=1.0)


def test_periodic_point_of_geometric_shift():
    w = derive_weights(tower_from_profile("geometric", 64))
    pp = build_periodic_point(w, 1, 1.0, 200)
    x, residual = pp
    assert residual == 0.0 and pp.stabilizes
    assert x[5] == x[-5] == 2.0 ** -5
    assert x[0] == 1.0


def test_periodic_point_norm_equals_mass_series(rng):
    """|x_k|^p telescopes to mu_k / mu(W) for the fixed point of the derived shift."""
    for _ in range(40):
        ratio = float(rng.uniform(0.1, 0.9))
        p = float(rng.choice([1.0, 2.0, 3.0]))
        tower = tower_from_profile({"kind": "geometric", "ratio": ratio}, 64, p=p,
                                   mass_w=float(rng.uniform(0.5, 2)))
        pp = build_periodic_point(derive_weights(tower), 1, 1.0, 100, p)
        for K in (3, 10, 50):
            ks = np.arange(-K, K + 1)
            want = tower.level_mass(ks).sum() / tower.mass_w
            assert pp.partial_norms[K] ** p == pytest.approx(want, rel=1e-12)


def test_periodic_point_period_two():
    w = WeightSequence(Step(0.5, 2.0), 64)
    x, residual = build_periodic_point(w, 2, 3.0, 40)
    assert residual == 0.0
    assert set(x.indices.tolist()) == set(range(-40, 41, 2))


@pytest.mark.parametrize("w", [Constant(1.0), Constant(2.0)])
def test_non_convergent_periodic_points(w):
    pp = build_periodic_point(WeightSequence(w, 1000), 1, 1.0, 900)
    assert pp.residual == 0.0
    assert not pp.stabilizes


def test_periodic_point_overflow_is_reported():
    with pytest.raises(OverflowError):
        build_periodic_point(WeightSequence(Constant(2.0), 2000), 1, 1.0, 1100)


def test_partial_norm_stabilization_rule():
    assert partial_norms_stabilize(np.r_[np.linspace(0, 1, 50), np.ones(50)])
    assert not partial_norms_stabilize(np.sqrt(np.arange(100.0)))
    assert not partial_norms_stabilize([1.0, np.inf])


def test_classify_examples(geometric, flat, harmonic):
    assert set(classify(geometric).statuses().values()) == {Status.SATISFIED}
    assert set(classify(flat).statuses().values()) == {Status.FAILED}
    s = classify(harmonic).statuses()
    assert s["recurrent"] is s["hypercyclic"] is Status.SATISFIED
    for f in ("chaotic", "frequently_hypercyclic", "frequently_recurrent",
              "reiteratively_recurrent"):
        assert s[f] is Status.UNDETERMINED


def test_classification_rejects_inconsistent_flags(geometric):
    c = classify(geometric)
    bad = replace(c.recurrent, status=Status.FAILED)
    with pytest.raises(InvariantViolation):
        replace(c, recurrent=bad)
    with pytest.raises(InvariantViolation):
        replace(c, recurrent=bad, hypercyclic=bad)  # chaotic without hypercyclic


def test_chaos_certificate_without_decay_is_downgraded():
    # geometric tails but huge masses: no decay witness below eps inside a short horizon
    tower = tower_from_profile({"kind": "geometric", "ratio": 0.9}, 64, mass_w=1e6)
    c = classify(tower, CriteriaConfig(horizon=100))
    assert c.hypercyclic.status is Status.FAILED
    assert c.chaotic.status is Status.UNDETERMINED
    assert "downgraded" in c.chaotic.diagnostics


def test_classify_invariants_over_random_towers(rng):
    from conftest import random_tower
    for _ in range(60):
        c = classify(random_tower(rng, K=float(rng.uniform(1, 2))))
        assert c.violations() == []


def test_admissible_radius_and_mass_chain(rng):
    for _ in range(300):
        ratio = float(rng.uniform(0.2, 0.9))
        p = float(rng.choice([1.0, 2.0]))
        tower = tower_from_profile({"kind": "geometric", "ratio": ratio}, 64, p=p)
        N = int(rng.integers(0, 4))
        n = int(rng.integers(2 * N + 1, 40))
        m = int(rng.integers(2 * N + 1, 40))
        eps = float(rng.uniform(1e-3, 0.5))
        delta = 0.999 * admissible_radius(eps, p, tower.c, tower.d, n, m)
        chain = mass_chain(tower, N, n, m, delta)
        # the transfer inequality holds and the chosen radius makes the bounds small
        assert chain.backward_n <= chain.transfer_bound * (1 + 1e-12)
        assert chain.return_bound < eps
        assert chain.transfer_constant * chain.return_bound < eps * (1 + 1e-12)


def test_verdict_json_round_trip(geometric):
    js = classify(geometric).to_json()
    assert js["chaotic"]["status"] == "SatisfiedWithWitness"
    assert isinstance(Verdict(Status.FAILED, 10).to_json(), dict)
    assert isinstance(Classification.FLAGS, tuple)
