import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_tower
from towerdyn import (BilateralSequence, MeasureTower, TowerFunction, ValidationError,
                      WeightSequence, WindowError, derive_weights, p_norm, tower_from_profile,
                      validate)
from towerdyn.profiles import Constant, Table


def test_norm_of_zero_sequence():
    assert p_norm(BilateralSequence.zeros(5), 2) == 0.0


def test_norm_of_unit_mass():
    assert p_norm(BilateralSequence.unit(0, 4), 3) == 1.0


def test_tower_function_norm_hand_sum():
    # one cell, mu(W) = 1, mu(f(W)) = 1/2; phi = 1 on levels 0 and 1
    tower = MeasureTower.from_tables([1.0, 1.0, 0.5], start=-1, window=1)
    phi = TowerFunction.from_dict(tower, {(0, 0): 1.0, (1, 0): 1.0})
    assert p_norm(phi, 1) == pytest.approx(1.5, rel=1e-15)


def test_tower_function_norm_matches_direct_sum(rng):
    for _ in range(50):
        tower = random_tower(rng)
        phi_levels = rng.choice(np.arange(-20, 21), size=5, replace=False)
        coeffs = rng.normal(size=(5, tower.cells))
        phi = TowerFunction(tower, phi_levels, coeffs)
        direct = 0.0
        for k, row in zip(phi_levels, coeffs):
            rho = 2.0 ** tower.log2_cell_masses([k])[0]
            direct += float(np.sum(np.abs(row) ** tower.p * rho))
        assert p_norm(phi) == pytest.approx(direct ** (1 / tower.p), rel=1e-12)


@pytest.mark.parametrize("p", [0.5, 0.0, -1.0, float("inf"), float("nan")])
def test_norm_rejects_bad_exponent(p):
    with pytest.raises(ValidationError):
        p_norm(BilateralSequence.unit(0, 2), p)


def test_validate_geometric(geometric):
    assert validate(geometric) == (2.0, 2.0, 1.0)


def test_validate_flat(flat):
    assert validate(flat) == (1.0, 1.0, 1.0)


def test_distortion_violation_rejected():
    lm = np.ones(5)
    cm = np.full((5, 2), 0.5)
    cm[3] = [0.6, 0.4]  # level 1: ratios 1.2 and 1.25 against p_i * mu_k = 0.5
    with pytest.raises(ValidationError, match="distortion"):
        MeasureTower.from_tables(lm, cm, start=-2, cell_fractions=[0.5, 0.5], K=1.0)
    with pytest.raises(ValidationError, match="1.25"):
        MeasureTower.from_tables(lm, cm, start=-2, cell_fractions=[0.5, 0.5], K=1.2)
    tower = MeasureTower.from_tables(lm, cm, start=-2, cell_fractions=[0.5, 0.5], K=1.25)
    assert tower.K_eff == pytest.approx(1.25)


def test_cell_sums_must_match_level_mass():
    cm = np.full((5, 2), 0.5)
    cm[1] = [0.5, 0.6]
    with pytest.raises(ValidationError, match="sum"):
        MeasureTower.from_tables(np.ones(5), cm, start=-2, cell_fractions=[0.5, 0.5], K=2)


def test_cell_fractions_must_sum_to_one():
    with pytest.raises(ValidationError):
        MeasureTower(Constant(), 8, np.array([0.5, 0.5 + 1e-9]))
    MeasureTower(Constant(), 8, np.array([0.5, 0.5 + 1e-13]))


@pytest.mark.parametrize("bad", [[1, 0, 1], [1, -2, 1], [1, float("inf"), 1]])
def test_nonpositive_masses_rejected(bad):
    with pytest.raises(ValidationError):
        MeasureTower.from_tables(bad)


def test_table_weights_do_not_extend():
    w = WeightSequence.from_table(np.full(9, 2.0))
    assert w.window == 4
    assert np.all(w([-4, 4]) == 2.0)
    with pytest.raises(WindowError):
        w([5])


def test_closed_form_weights_extend_beyond_window():
    w = WeightSequence(Constant(3.0), 4)
    assert w([100])[0] == pytest.approx(3.0)


def test_sequence_rejects_out_of_window_index():
    with pytest.raises(WindowError):
        BilateralSequence(np.array([5]), np.array([1.0]), 4)


def test_sequence_drops_zeros_and_sorts():
    x = BilateralSequence.from_dict({3: 1.0, -2: 0.0, -5: 2.0}, 8)
    assert x.indices.tolist() == [-5, 3]
    assert x[3] == 1.0 and x[-2] == 0.0
    with pytest.raises(ValueError):
        x.values[0] = 4.0


def test_omitted_cell_masses_give_unit_distortion(rng):
    for _ in range(30):
        tower = random_tower(rng, K=1.0)
        assert tower.K_eff == 1.0


def test_star_constants_bound_derived_weights(rng):
    for _ in range(200):
        tower = random_tower(rng, K=float(rng.uniform(1, 3)))
        c, d, _ = validate(tower)
        assert c * d >= 1 - 1e-12
        w = derive_weights(tower)
        ks = np.arange(-tower.window + 1, tower.window + 1)
        wk = w(ks)
        assert np.all(wk <= c ** (1 / tower.p) * (1 + 1e-12))
        assert np.all(1 / wk <= d ** (1 / tower.p) * (1 + 1e-12))


finite = st.floats(-1e6, 1e6, allow_nan=False)


@st.composite
def sequences(draw, size=st.integers(0, 12)):
    n = draw(size)
    idx = draw(st.lists(st.integers(-30, 30), min_size=n, max_size=n, unique=True))
    vals = draw(st.lists(finite, min_size=n, max_size=n))
    return BilateralSequence(np.array(idx, dtype=np.int64), np.array(vals), 30)


@given(sequences(), sequences(), st.sampled_from([1.0, 1.5, 2.0, 4.0]))
def test_norm_triangle_inequality(x, y, p):
    assert p_norm(x + y, p) <= (p_norm(x, p) + p_norm(y, p)) * (1 + 1e-12) + 1e-300


@given(sequences(), st.floats(-1e3, 1e3, allow_nan=False), st.sampled_from([1.0, 2.0, 3.5]))
def test_norm_absolute_homogeneity(x, a, p):
    assert p_norm(a * x, p) == pytest.approx(abs(a) * p_norm(x, p), rel=1e-12, abs=1e-300)


def test_tower_norm_survives_deep_levels():
    # mu_2700 = 2^-2700 underflows and |c|^3 = 2^2700 overflows; the product is 1
    tower = tower_from_profile("geometric", 64, p=3.0)
    phi = TowerFunction.indicator(tower, [2700], 2.0 ** 900)
    assert p_norm(phi) == pytest.approx(1.0, rel=1e-12)


def test_profile_table_equality():
    a = Table.from_values(-1, [1.0, 2.0, 3.0])
    b = Table.from_values(-1, [1.0, 2.0, 3.0])
    assert a == b and hash(a) == hash(b)
