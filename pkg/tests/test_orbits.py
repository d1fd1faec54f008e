import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_tower
from towerdyn import (BilateralSequence, Evidence, TowerFunction, ValidationError,
                      WeightSequence, build_periodic_point, derive_weights, factor_map,
                      frequent_recurrence_evidence, orbit_distances, p_norm, random_sequence,
                      random_tower_function, recurrence_hits, tower_from_profile)
from towerdyn.profiles import Constant, Step


def test_fixed_point_never_moves():
    w = WeightSequence(Step(0.5, 2.0), 1300)
    x, _ = build_periodic_point(w, 1, 1.0, 1150)
    d = orbit_distances(w, x, 50, p=1.0)
    # exact up to the one subnormal entry lost where the truncated point ends
    assert d.max() <= 1e-300
    ev = frequent_recurrence_evidence(w, x, n_max=50, p=1.0)
    assert ev.evidence is Evidence.FOR
    assert all(r.lower_density == 1.0 for r in ev.per_delta)


def test_interior_fixed_point_is_exact():
    w = WeightSequence(Step(0.5, 2.0), 400)
    x, _ = build_periodic_point(w, 1, 1.0, 300)
    x = x.restrict(-200, 200)
    # only the two cut edges of the restricted point move
    lhs = orbit_distances(w, x, 1, p=1.0)[0]
    edge = 2.0 ** -200 + 2.0 ** -201
    assert lhs == pytest.approx(edge, rel=1e-12)


def test_period_two_point_hits_even_times():
    w = WeightSequence(Step(0.5, 2.0), 400)
    x, _ = build_periodic_point(w, 2, 1.0, 300)
    h = recurrence_hits(w, x, 1e-6, 20, p=1.0)
    assert h.hits.tolist() == list(range(2, 21, 2))


def test_unit_vector_under_unweighted_shift_never_returns():
    w = WeightSequence(Constant(), 64)
    x = BilateralSequence.unit(0, 64)
    d = orbit_distances(w, x, 30, p=1.0)
    assert np.all(d == 2.0)
    ev = frequent_recurrence_evidence(w, x, n_max=30, p=1.0)
    assert ev.evidence is Evidence.AGAINST


def test_composition_orbit_of_level_indicator(flat):
    phi = TowerFunction.indicator(flat, [0])
    assert orbit_distances(flat, phi, 5).tolist() == [2.0] * 5


def test_zero_vector_rejected(geometric):
    with pytest.raises(ValidationError):
        frequent_recurrence_evidence(geometric, TowerFunction.zeros(geometric), n_max=10)


def test_delta_grid_must_decrease(geometric):
    phi = TowerFunction.indicator(geometric, [0])
    with pytest.raises(ValidationError):
        frequent_recurrence_evidence(geometric, phi, [0.1, 0.5], n_max=10)


def test_shift_orbit_needs_exponent():
    with pytest.raises(ValidationError):
        orbit_distances(WeightSequence(Constant(), 4), BilateralSequence.unit(0, 4), 3)


@given(st.integers(0, 2**31), st.floats(1e-3, 2.0), st.floats(1e-3, 2.0))
def test_hits_monotone_in_radius(seed, a, b):
    rng = np.random.default_rng(seed)
    w = WeightSequence(Step(0.5, 2.0), 200)
    x = random_sequence(rng, 20)
    d = orbit_distances(w, x, 40, p=1.0)
    small, big = sorted((a, b))
    assert recurrence_hits(w, x, small, 40, distances=d).issubset(
        recurrence_hits(w, x, big, 40, distances=d))


def test_hits_transfer_to_factor(rng):
    """With K = 1 the factor map is a contraction, so T_f hits are B_w hits."""
    for _ in range(200):
        tower = random_tower(rng, window=64, K=1.0, profiles=("geometric", "flat", "harmonic"))
        w = derive_weights(tower)
        phi = random_tower_function(tower, rng, -8, 8, size=int(rng.integers(1, 6)))
        d_tower = orbit_distances(tower, phi, 30)
        d_factor = orbit_distances(w, factor_map(tower, phi), 30, p=tower.p)
        delta = float(rng.uniform(0.05, 2.0)) * p_norm(phi)
        assert recurrence_hits(tower, phi, delta, 30, distances=d_tower).issubset(
            recurrence_hits(w, None, delta, 30, distances=d_factor))


def test_evidence_json_is_plain(geometric):
    phi = TowerFunction.indicator(geometric, [0])
    js = frequent_recurrence_evidence(geometric, phi, n_max=20).to_json()
    assert js["evidence"] in {e.value for e in Evidence}
    assert len(js["per_delta"]) == 3
