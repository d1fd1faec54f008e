"""The weighted backward shift as a factor of the composition operator.

For a tower with level masses ``mu_k`` and exponent ``p``, the weights
``w_k = (mu_{k-1} / mu_k)**(1/p)`` and the map

    Pi(phi)_k = mu_k**(1/p) / mu(W) * integral over W of phi o f^k

satisfy ``Pi o T_f = B_w o Pi``.  On a tower function the integral is a
cellwise sum, so ``Pi(phi)_k = mu_k**(1/p) * sum_i c_{k,i} p_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_types import (BilateralSequence, MeasureTower, TowerFunction, WeightSequence,
                         p_norm, scale_by_pow2)
from .operators import ShiftPowers, apply_composition
from .profiles import MassRatio

__all__ = [
    "derive_weights",
    "factor_map",
    "lift",
    "SemiconjugacyReport",
    "check_semiconjugacy",
    "factor_norm_ratio",
]


def derive_weights(tower: MeasureTower) -> WeightSequence:
    """Weights of the shift that is a factor of ``T_f``.

    Only level masses enter; cell structure is irrelevant to the weights.
    """
    return WeightSequence(MassRatio(tower.levels, tower.p), tower.window)


def factor_map(tower: MeasureTower, phi: TowerFunction) -> BilateralSequence:
    if phi.is_zero:
        return BilateralSequence.zeros(tower.window)
    avg = phi.coefficients @ tower.cell_fractions
    vals = scale_by_pow2(avg, tower.log2_level_mass(phi.levels) / tower.p)
    window = max(tower.window, int(np.abs(phi.levels).max()))
    return BilateralSequence(phi.levels, vals, window)


def lift(tower: MeasureTower, y: BilateralSequence) -> TowerFunction:
    """Level-constant preimage of ``y`` under the factor map.

    ``c_{k,i} = y_k / mu_k**(1/p)`` on every cell; this is an isometric right
    inverse of :func:`factor_map`, whatever the cell distortion.
    """
    if y.is_zero:
        return TowerFunction.zeros(tower)
    vals = scale_by_pow2(y.values, -tower.log2_level_mass(y.indices) / tower.p)
    coeffs = np.repeat(vals[:, None], tower.cells, axis=1)
    return TowerFunction(tower, y.indices, coeffs)


@dataclass(frozen=True)
class SemiconjugacyReport:
    residuals: tuple[float, ...]
    tol: float
    scale: float
    passed: bool

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    def to_json(self) -> dict:
        return {
            "residuals": list(self.residuals),
            "max_residual": self.max_residual,
            "tol": self.tol,
            "scale": self.scale,
            "passed": self.passed,
        }


def check_semiconjugacy(tower: MeasureTower, phi: TowerFunction, n_steps: int,
                        tol: float = 1e-9) -> SemiconjugacyReport:
    """Compare ``Pi(T_f^n phi)`` with ``B_w^n Pi(phi)`` for ``n = 1..n_steps``.

    Passes when every residual is at most ``tol * max(1, ||phi||_p)``.
    """
    w = derive_weights(tower)
    y0 = factor_map(tower, phi)
    p = tower.p
    residuals = []
    if not y0.is_zero:
        j = y0.indices
        powers = ShiftPowers(w, int(j[0]) - n_steps, int(j[-1]))
    for n in range(1, int(n_steps) + 1):
        lhs = factor_map(tower, apply_composition(tower, phi, n))
        rhs = powers.apply(y0, n) if not y0.is_zero else y0
        residuals.append(p_norm(lhs - rhs, p))
    scale = max(1.0, p_norm(phi))
    passed = all(r <= tol * scale for r in residuals)
    return SemiconjugacyReport(tuple(residuals), float(tol), scale, passed)


def factor_norm_ratio(tower: MeasureTower, phi: TowerFunction) -> float:
    """``||Pi(phi)|| / ||phi||``; at most 1 when the tower has no distortion.

    For distorted towers the ratio can exceed 1 and is only reported.
    """
    den = p_norm(phi)
    if den == 0:
        return 0.0
    return p_norm(factor_map(tower, phi), tower.p) / den
