"""Exact powers of the weighted backward shift and the composition operator."""

from __future__ import annotations

import numpy as np

from .core_types import (BilateralSequence, MeasureTower, TowerFunction, WeightSequence,
                         scale_by_pow2)

__all__ = ["ShiftPowers", "apply_shift", "apply_composition", "operator_norm_bound"]


class ShiftPowers:
    """Log2 weight products ``prod_{v=a+1..b} w_v`` for ``lo <= a, b <= hi``.

    One extended-precision prefix sum serves every power of the shift that
    stays inside ``[lo, hi]``; orbits reuse it instead of re-multiplying.
    """

    def __init__(self, weights: WeightSequence, lo: int, hi: int):
        lo, hi = int(lo), int(hi)
        if hi <= lo:
            hi = lo + 1
        self.lo, self.hi = lo, hi
        # g[t] = sum of log2 w_v for v in (lo, lo + t]
        lw = weights.log2(np.arange(lo + 1, hi + 1))
        self._g = np.zeros(lw.size + 1, dtype=np.longdouble)
        self._g[1:] = np.cumsum(np.asarray(lw, dtype=np.longdouble))

    def log2_factor(self, j: np.ndarray, n: int) -> np.ndarray:
        """log2 of the factor multiplying ``x_j`` when it lands at ``j - n``."""
        g = self._g
        return np.asarray(g[j - self.lo] - g[j - n - self.lo], dtype=np.float64)

    def apply(self, x: BilateralSequence, n: int) -> BilateralSequence:
        if n == 0 or x.is_zero:
            return x
        j = x.indices
        vals = scale_by_pow2(x.values, self.log2_factor(j, n))
        new = j - n
        window = max(x.window, int(np.abs(new).max()))
        return BilateralSequence(new, vals, window)


def apply_shift(w: WeightSequence, x: BilateralSequence, n: int) -> BilateralSequence:
    """``B_w^n x`` for any integer ``n``; ``(B_w x)_i = w_{i+1} x_{i+1}``.

    For ``n >= 1``, ``y_i = (prod_{v=i+1..i+n} w_v) x_{i+n}``; negative ``n``
    applies the inverse ``(B_w^-1 x)_i = x_{i-1} / w_i`` ``|n|`` times.  The
    weight product is one log-space sum, not ``n`` multiplications.
    """
    n = int(n)
    if n == 0 or x.is_zero:
        return x
    j = x.indices
    lo = int(min(j[0], j[0] - n))
    hi = int(max(j[-1], j[-1] - n))
    return ShiftPowers(w, lo, hi).apply(x, n)


def apply_composition(tower: MeasureTower, phi: TowerFunction, n: int) -> TowerFunction:
    """``T_f^n phi = phi o f^n``: the coefficient on level ``k`` becomes ``c_{k+n}``."""
    n = int(n)
    if phi.tower is not tower:
        raise ValueError("tower function belongs to a different tower")
    if n == 0 or phi.is_zero:
        return phi
    return TowerFunction(tower, phi.levels - n, phi.coefficients)


def operator_norm_bound(tower: MeasureTower) -> tuple[float, float]:
    """``(c**(1/p), d**(1/p))``, bounding ``||T_f||`` and ``||T_f^-1||``."""
    return tower.c ** (1.0 / tower.p), tower.d ** (1.0 / tower.p)
