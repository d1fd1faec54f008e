"""Lower density and upper Banach density of finite hit sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["HitSet", "DensityEstimate", "lower_density", "upper_banach_density",
           "default_window_lengths"]


@dataclass(frozen=True, eq=False)
class HitSet:
    """Sorted positive integers ``<= horizon`` (e.g. return times to a ball)."""

    hits: np.ndarray
    horizon: int

    def __post_init__(self):
        h = np.asarray(self.hits, dtype=np.int64).ravel()
        horizon = int(self.horizon)
        if horizon < 1:
            raise ValueError("horizon must be a positive integer")
        if h.size and (np.any(np.diff(h) <= 0) or h[0] < 1 or h[-1] > horizon):
            raise ValueError("hits must be strictly increasing integers in [1, horizon]")
        h.setflags(write=False)
        object.__setattr__(self, "hits", h)
        object.__setattr__(self, "horizon", horizon)

    @classmethod
    def from_indicator(cls, indicator) -> "HitSet":
        """``indicator[n-1]`` says whether ``n`` is a hit."""
        ind = np.asarray(indicator, dtype=bool)
        return cls(np.flatnonzero(ind) + 1, ind.size)

    @classmethod
    def from_iterable(cls, hits, horizon: int) -> "HitSet":
        return cls(np.unique(np.fromiter(hits, dtype=np.int64)), horizon)

    def indicator(self) -> np.ndarray:
        ind = np.zeros(self.horizon, dtype=bool)
        ind[self.hits - 1] = True
        return ind

    def __len__(self):
        return int(self.hits.size)

    def __contains__(self, n):
        pos = np.searchsorted(self.hits, n)
        return bool(pos < self.hits.size and self.hits[pos] == n)

    def issubset(self, other: "HitSet") -> bool:
        return bool(np.all(np.isin(self.hits, other.hits)))


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    profile: np.ndarray
    argument: np.ndarray

    def to_json(self) -> dict:
        return {"value": self.value}


def lower_density(h: HitSet, tail_start: int | None = None) -> DensityEstimate:
    """Tail minimum of ``a_N = #(h within [1, N]) / N`` over ``N >= tail_start``.

    ``profile`` holds the full sequence ``a_1..a_horizon`` and ``argument`` the
    ``N`` values, so convergence can be inspected.  Default ``tail_start`` is
    half the horizon.
    """
    H = h.horizon
    if tail_start is None:
        tail_start = max(1, H // 2)
    tail_start = int(tail_start)
    if not 1 <= tail_start <= H:
        raise ValueError(f"tail_start must lie in [1, {H}]")
    N = np.arange(1, H + 1)
    a = np.cumsum(h.indicator()) / N
    return DensityEstimate(float(a[tail_start - 1:].min()), a, N)


def default_window_lengths(horizon: int) -> list[int]:
    """Powers of two from 4, closed off by ``horizon // 2``.

    A length-``L`` window resolves densities to within ``1 / L``, so ending at
    half the horizon matches the default lower-density tail.
    """
    half = max(1, horizon // 2)
    lengths = []
    L = 4
    while L < half:
        lengths.append(L)
        L *= 2
    lengths.append(half)
    return [L for L in lengths if L <= horizon] or [horizon]


def upper_banach_density(h: HitSet, window_lengths=None) -> DensityEstimate:
    """Best windowed hit rate at each window length; value at the longest.

    For each length ``L`` this is ``max_m #(h within [m, m+L-1]) / L`` over every
    placement inside ``[1, horizon]``, one cumulative sum per length.
    """
    H = h.horizon
    if window_lengths is None:
        window_lengths = default_window_lengths(H)
    lengths = np.asarray(sorted({int(L) for L in window_lengths}), dtype=np.int64)
    if lengths.size == 0 or lengths[0] < 1:
        raise ValueError("window lengths must be positive")
    if lengths[-1] > H:
        raise ValueError(f"window length {int(lengths[-1])} exceeds horizon {H}")
    cs = np.concatenate([[0], np.cumsum(h.indicator())])
    best = np.array([(cs[L:] - cs[:-L]).max() / L for L in lengths])
    return DensityEstimate(float(best[-1]), best, lengths)
