"""Integer-indexed profiles returning base-2 logarithms.

Level masses and weights are both stored as ``k -> log2(value)`` maps.  Base 2
keeps dyadic data (ratios of 1/2, weights of 2) exact through the whole
pipeline, and the log representation keeps deep tower levels from underflowing.

Closed-form profiles are defined on all of Z.  :class:`Table` is defined on a
finite range only and raises :class:`~towerdyn.errors.WindowError` outside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, WindowError

__all__ = [
    "Profile",
    "Geometric",
    "Constant",
    "Harmonic",
    "Step",
    "Table",
    "MassRatio",
    "WeightProduct",
    "signed_prefix",
]


def _as_index(k) -> np.ndarray:
    return np.asarray(k, dtype=np.int64)


def signed_prefix(log2_values: np.ndarray, lo: int) -> np.ndarray:
    """Prefix function ``G`` with ``G(0) = 0`` and ``G(k) - G(k-1) = v_k``.

    ``log2_values[t]`` holds ``v_{lo+t}`` and the range must contain 0 and 1 in
    its closure (``lo <= 1``).  Returns ``G`` on ``[lo-1, lo-1+len]`` as
    extended-precision floats, accumulated outward from 0 so that values near
    the origin do not inherit rounding from far-away terms.
    """
    v = np.asarray(log2_values, dtype=np.longdouble)
    hi = lo + len(v) - 1
    g = np.zeros(len(v) + 1, dtype=np.longdouble)
    zero = -(lo - 1)  # position of G(0) in g
    if hi >= 1:
        g[zero + 1:] = np.cumsum(v[zero:])
    if lo <= 0:
        # G(k) = -(v_{k+1} + ... + v_0) for k < 0
        left = v[:zero][::-1]
        g[:zero] = -np.cumsum(left)[::-1]
    return g


class Profile:
    """A map ``k -> log2(value)`` on a (possibly unbounded) integer range."""

    lo: float = -math.inf
    hi: float = math.inf

    @property
    def domain(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) or math.isfinite(self.hi)

    def check(self, k) -> np.ndarray:
        k = _as_index(k)
        if k.size and (k.min() < self.lo or k.max() > self.hi):
            raise WindowError(
                f"index range [{int(k.min())}, {int(k.max())}] outside "
                f"table range [{self.lo}, {self.hi}] of {type(self).__name__}"
            )
        return k

    def log2(self, k) -> np.ndarray:
        k = self.check(k)
        return self._log2(k)

    def _log2(self, k: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, k) -> np.ndarray:
        return np.exp2(self.log2(k))

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Geometric(Profile):
    """``scale * ratio**|k|``."""

    ratio: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.ratio > 0 and self.scale > 0):
            raise ValidationError("geometric profile needs positive ratio and scale")

    def _log2(self, k):
        return math.log2(self.scale) + np.abs(k) * math.log2(self.ratio)

    def describe(self):
        return {"kind": "geometric", "ratio": self.ratio, "scale": self.scale}


@dataclass(frozen=True)
class Constant(Profile):
    value: float = 1.0

    def __post_init__(self):
        if not self.value > 0:
            raise ValidationError("constant profile needs a positive value")

    def _log2(self, k):
        return np.full(k.shape, math.log2(self.value))

    def describe(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class Harmonic(Profile):
    """``scale / (|k| + 1)``."""

    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValidationError("harmonic profile needs a positive scale")

    def _log2(self, k):
        return math.log2(self.scale) - np.log2(np.abs(k) + 1.0)

    def describe(self):
        return {"kind": "harmonic", "scale": self.scale}


@dataclass(frozen=True)
class Step(Profile):
    """``right`` for ``k >= 1`` and ``left`` for ``k <= 0``."""

    left: float
    right: float

    def __post_init__(self):
        if not (self.left > 0 and self.right > 0):
            raise ValidationError("step profile needs positive values")

    def _log2(self, k):
        return np.where(k >= 1, math.log2(self.right), math.log2(self.left))

    def describe(self):
        return {"kind": "step", "left": self.left, "right": self.right}


@dataclass(frozen=True, eq=False)
class Table(Profile):
    """Explicit values on ``[lo, lo + len - 1]``; stored as log2."""

    start: int
    values_log2: np.ndarray

    def __post_init__(self):
        v = np.array(self.values_log2, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("table must be a non-empty 1-d array")
        if not np.all(np.isfinite(v)):
            raise ValidationError("table values must be finite and positive")
        v.setflags(write=False)
        object.__setattr__(self, "values_log2", v)

    @classmethod
    def from_values(cls, start: int, values) -> "Table":
        v = np.asarray(values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("table must be a non-empty 1-d array")
        if np.any(~np.isfinite(v)) or np.any(v <= 0):
            raise ValidationError("table values must be finite and positive")
        return cls(int(start), np.log2(v))

    @property
    def lo(self):
        return self.start

    @property
    def hi(self):
        return self.start + len(self.values_log2) - 1

    def _log2(self, k):
        return self.values_log2[k - self.start]

    def __eq__(self, other):
        return (
            isinstance(other, Table)
            and self.start == other.start
            and np.array_equal(self.values_log2, other.values_log2)
        )

    def __hash__(self):
        return hash((self.start, self.values_log2.tobytes()))

    def describe(self):
        return {
            "kind": "table",
            "start": self.start,
            "values": np.exp2(self.values_log2).tolist(),
        }


@dataclass(frozen=True)
class MassRatio(Profile):
    """Weights read off level masses: ``w_k = (mu_{k-1} / mu_k) ** (1/p)``."""

    levels: Profile
    p: float

    @property
    def lo(self):
        return self.levels.lo + 1

    @property
    def hi(self):
        return self.levels.hi

    def _log2(self, k):
        m = self.levels.log2(np.concatenate([k - 1, k]))
        return (m[: k.size] - m[k.size:]) / self.p

    def describe(self):
        return {"kind": "mass_ratio", "p": self.p, "levels": self.levels.describe()}


@dataclass(frozen=True)
class WeightProduct(Profile):
    """Level masses rebuilt from weights by telescoping products.

    ``mu_k = mu_W * prod_{v=1..k} w_v**(-p)`` for ``k > 0`` and
    ``mu_{-k} = mu_W * prod_{v=0..k-1} w_{-v}**p``.
    """

    weights: Profile
    p: float
    log2_mass_w: float = 0.0

    def __post_init__(self):
        if self.weights.lo > 0 or self.weights.hi < 1:
            raise ValidationError("weights must be defined at indices 0 and 1")

    @property
    def lo(self):
        return self.weights.lo - 1

    @property
    def hi(self):
        return self.weights.hi

    def _log2(self, k):
        if k.size == 0:
            return np.zeros(0)
        a = min(int(k.min()), 0)
        b = max(int(k.max()), 1)
        lw = self.weights.log2(np.arange(a + 1, b + 1))
        g = signed_prefix(lw, a + 1)  # g[t] = G(a + t)
        out = self.log2_mass_w - self.p * g[k - a]
        return np.asarray(out, dtype=np.float64)

    def describe(self):
        return {
            "kind": "weight_product",
            "p": self.p,
            "mass_w": float(np.exp2(self.log2_mass_w)),
            "weights": self.weights.describe(),
        }
