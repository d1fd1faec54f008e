"""Reproducible towers, weights and random test vectors."""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from .core_types import BilateralSequence, MeasureTower, TowerFunction, WeightSequence
from .errors import ValidationError
from .profiles import Constant, Geometric, Harmonic, Table, WeightProduct

__all__ = [
    "PROFILE_KINDS",
    "tower_from_profile",
    "tower_from_weights",
    "random_tower_function",
    "random_sequence",
]

PROFILE_KINDS = ("geometric", "flat", "harmonic", "custom", "random_distorted")


def _parse_profile(profile) -> tuple[str, dict]:
    if isinstance(profile, str):
        return profile, {}
    if isinstance(profile, Mapping):
        params = dict(profile)
        kind = params.pop("kind", None)
        if kind is None:
            raise ValidationError("profile mapping needs a 'kind'")
        return kind, params
    raise ValidationError(f"cannot read profile {profile!r}")


def _cell_fractions(cells, rng) -> np.ndarray:
    if np.ndim(cells) == 0:
        m = int(cells)
        if m < 1:
            raise ValidationError("cells must be >= 1")
        if m == 1:
            return np.ones(1)
        fr = rng.dirichlet(np.ones(m))
        fr = np.maximum(fr, 1e-3)
        return fr / fr.sum()
    fr = np.asarray(cells, dtype=np.float64)
    return fr / fr.sum() if abs(fr.sum() - 1) <= 1e-12 else fr


def tower_from_profile(profile, window: int, cells=1, K: float = 1.0,
                       seed: int | None = 0, *, p: float = 1.0,
                       mass_w: float = 1.0) -> MeasureTower:
    """Build a validated tower from a named level profile.

    ``profile`` is a name or a mapping with ``kind`` and parameters:

    - ``geometric`` (``ratio`` in (0, 1), default 1/2): ``mass_w * ratio**|k|``
    - ``flat``: ``mass_w`` on every level
    - ``harmonic``: ``mass_w / (|k| + 1)``
    - ``custom`` (``masses``, centred on level 0, optional ``start``)
    - ``random_distorted``: log2 level ratios drawn uniformly from
      ``[-spread, spread]`` (default 1) on ``[-M, M]``

    ``cells`` is a cell count (random fractions when > 1) or explicit
    fractions.  With ``K > 1`` and more than one cell, cell masses on
    ``[-M, M]`` are perturbed by factors within ``K`` and renormalised per
    level, which restricts the tower to that range.  The same seed always
    gives the same tower.
    """
    kind, params = _parse_profile(profile)
    window = int(window)
    if window < 1:
        raise ValidationError("window must be >= 1")
    K = float(K)
    if not K >= 1:
        raise ValidationError("K must be >= 1")
    rng = np.random.default_rng(seed)
    if kind == "geometric":
        ratio = float(params.get("ratio", 0.5))
        if not 0 < ratio < 1:
            raise ValidationError("geometric ratio must lie in (0, 1)")
        levels = Geometric(ratio, mass_w)
    elif kind == "flat":
        levels = Constant(mass_w)
    elif kind == "harmonic":
        levels = Harmonic(mass_w)
    elif kind == "custom":
        masses = np.asarray(params["masses"], dtype=np.float64)
        start = params.get("start", -(masses.size // 2))
        levels = Table.from_values(start, masses)
    elif kind == "random_distorted":
        spread = float(params.get("spread", 1.0))
        steps = rng.uniform(-spread, spread, size=2 * window)
        lm = np.concatenate([[0.0], np.cumsum(steps)])
        lm = lm - lm[window] + math.log2(mass_w)
        levels = Table(-window, lm)
    else:
        raise ValidationError(f"unknown profile {kind!r}; expected one of {PROFILE_KINDS}")

    fractions = _cell_fractions(params.get("cells", cells), rng)
    cell_log2 = None
    start = 0
    if K > 1 and fractions.size > 1:
        ks = np.arange(-window, window + 1)
        lm = levels.log2(ks)
        # factors in [K^-1/2, K^1/2] keep every ratio to p_i * mu_k within [1/K, K]
        g = rng.uniform(-0.5, 0.5, size=(ks.size, fractions.size)) * math.log2(K)
        raw = np.exp2(g) * fractions[None, :]
        shares = raw / raw.sum(axis=1, keepdims=True)
        cell_log2 = lm[:, None] + np.log2(shares)
        start = -window
    return MeasureTower(levels, window, fractions, cell_log2, start, K, p)


def tower_from_weights(w: WeightSequence, p: float = 1.0, mass_w: float = 1.0) -> MeasureTower:
    """One-cell, undistorted tower whose derived weights are ``w``.

    ``mu_k = mass_w * prod_{v=1..k} w_v**(-p)`` for ``k > 0`` and
    ``mu_{-k} = mass_w * prod_{v=0..k-1} w_{-v}**p``.
    """
    levels = WeightProduct(w.profile, float(p), math.log2(mass_w))
    return MeasureTower(levels, w.window, np.ones(1), None, 0, 1.0, p)


def random_tower_function(tower: MeasureTower, rng: np.random.Generator,
                          lo: int | None = None, hi: int | None = None,
                          size: int | None = None) -> TowerFunction:
    """Random coefficients on ``size`` distinct levels of ``[lo, hi]``."""
    lo = -tower.window if lo is None else int(lo)
    hi = tower.window if hi is None else int(hi)
    span = hi - lo + 1
    size = int(rng.integers(1, min(span, 12) + 1)) if size is None else min(size, span)
    levels = np.sort(rng.choice(np.arange(lo, hi + 1), size=size, replace=False))
    coeffs = rng.normal(size=(size, tower.cells))
    return TowerFunction(tower, levels, coeffs)


def random_sequence(rng: np.random.Generator, window: int, size: int | None = None,
                    lo: int | None = None, hi: int | None = None) -> BilateralSequence:
    lo = -window if lo is None else int(lo)
    hi = window if hi is None else int(hi)
    span = hi - lo + 1
    size = int(rng.integers(1, min(span, 16) + 1)) if size is None else min(size, span)
    idx = rng.choice(np.arange(lo, hi + 1), size=size, replace=False)
    return BilateralSequence(idx, rng.normal(size=size), window)
