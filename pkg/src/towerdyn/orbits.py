"""Orbit distances, return-time hit sets and finite recurrence evidence.

An operator is given either as a :class:`WeightSequence` (the shift ``B_w``,
acting on :class:`BilateralSequence`) or as a :class:`MeasureTower` (the
composition operator ``T_f``, acting on :class:`TowerFunction`).
Neighbourhoods of ``x`` are the open norm balls around it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core_types import (BilateralSequence, MeasureTower, TowerFunction, WeightSequence,
                         p_norm)
from .densities import HitSet, default_window_lengths, lower_density, upper_banach_density
from .errors import ValidationError
from .operators import ShiftPowers, apply_composition

__all__ = [
    "orbit_distances",
    "recurrence_hits",
    "Evidence",
    "DeltaEvidence",
    "RecurrenceEvidence",
    "frequent_recurrence_evidence",
]


def _resolve_p(op, p):
    if isinstance(op, MeasureTower):
        return op.p if p is None else float(p)
    if p is None:
        raise ValidationError("an exponent p is required for shift orbits")
    return float(p)


def orbit_distances(op, x, n_max: int, p: float | None = None) -> np.ndarray:
    """``d_n = ||T^n x - x||_p`` for ``n = 1..n_max`` (index ``n - 1``).

    Each power is taken in closed form; for shifts all powers share one
    prefix of log weights.
    """
    n_max = int(n_max)
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    p = _resolve_p(op, p)
    out = np.zeros(n_max)
    if isinstance(op, WeightSequence):
        if not isinstance(x, BilateralSequence):
            raise TypeError("shift orbits need a BilateralSequence")
        if x.is_zero:
            return out
        powers = ShiftPowers(op, int(x.indices[0]) - n_max, int(x.indices[-1]))
        for n in range(1, n_max + 1):
            out[n - 1] = p_norm(powers.apply(x, n) - x, p)
        return out
    if isinstance(op, MeasureTower):
        if not isinstance(x, TowerFunction):
            raise TypeError("composition orbits need a TowerFunction")
        if x.is_zero:
            return out
        op.check_levels(x.levels - n_max)
        for n in range(1, n_max + 1):
            out[n - 1] = p_norm(apply_composition(op, x, n) - x, p)
        return out
    raise TypeError(f"unsupported operator {type(op).__name__}")


def recurrence_hits(op, x, delta: float, n_max: int, p: float | None = None,
                    distances: np.ndarray | None = None) -> HitSet:
    """Return times ``{n <= n_max : d_n < delta}``."""
    if not delta > 0:
        raise ValidationError("delta must be positive")
    if distances is None:
        distances = orbit_distances(op, x, n_max, p)
    return HitSet.from_indicator(np.asarray(distances) < delta)


class Evidence(str, enum.Enum):
    FOR = "Evidence-For"
    AGAINST = "Evidence-Against"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class DeltaEvidence:
    delta: float
    hits: int
    tail_hits: int
    lower_density: float
    upper_banach_density: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class RecurrenceEvidence:
    """Finite-orbit evidence about frequent recurrence; never a proof."""

    evidence: Evidence
    per_delta: tuple[DeltaEvidence, ...]
    n_max: int
    tail_start: int
    density_threshold: float
    distances: np.ndarray

    def to_json(self) -> dict:
        return {
            "evidence": self.evidence.value,
            "n_max": self.n_max,
            "tail_start": self.tail_start,
            "density_threshold": self.density_threshold,
            "per_delta": [d.to_json() for d in self.per_delta],
        }


def frequent_recurrence_evidence(op, x, delta_grid=None, n_max: int = 1000,
                                 density_threshold: float = 0.01, p: float | None = None,
                                 tail_start: int | None = None,
                                 window_lengths=None) -> RecurrenceEvidence:
    """Lower and upper Banach densities of return times, per ball radius.

    Evidence-For when every radius gives lower density at least
    ``density_threshold``; Evidence-Against when some radius has no returns
    in the tail ``[tail_start, n_max]``; otherwise Inconclusive.  The default
    radii are ``(0.5, 0.1, 0.01) * ||x||``.  The zero vector is rejected: it is
    trivially recurrent and says nothing.
    """
    p = _resolve_p(op, p)
    scale = p_norm(x, p)
    if scale == 0:
        raise ValidationError("the zero vector is excluded: it is trivially recurrent")
    if delta_grid is None:
        delta_grid = [0.5 * scale, 0.1 * scale, 0.01 * scale]
    grid = [float(d) for d in delta_grid]
    if not grid:
        raise ValidationError("delta_grid must be non-empty")
    if any(b >= a for a, b in zip(grid, grid[1:])) or grid[-1] <= 0:
        raise ValidationError("delta_grid must be positive and strictly decreasing")
    n_max = int(n_max)
    if tail_start is None:
        tail_start = max(1, n_max // 2)
    if window_lengths is None:
        window_lengths = default_window_lengths(n_max)
    d = orbit_distances(op, x, n_max, p)
    rows = []
    for delta in grid:
        h = recurrence_hits(op, x, delta, n_max, p, distances=d)
        rows.append(DeltaEvidence(
            delta=delta,
            hits=len(h),
            tail_hits=int(np.count_nonzero(h.hits >= tail_start)),
            lower_density=lower_density(h, tail_start).value,
            upper_banach_density=upper_banach_density(h, window_lengths).value,
        ))
    if all(r.lower_density >= density_threshold for r in rows):
        verdict = Evidence.FOR
    elif any(r.tail_hits == 0 for r in rows):
        verdict = Evidence.AGAINST
    else:
        verdict = Evidence.INCONCLUSIVE
    return RecurrenceEvidence(verdict, tuple(rows), n_max, int(tail_start),
                              float(density_threshold), d)
