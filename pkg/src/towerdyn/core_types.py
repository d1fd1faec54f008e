"""Sequences, weights, measure towers and functions on towers.

Every value here is immutable once built.  Indices live on a window
``[-M, M]``: closed-form profiles may be evaluated beyond it, tables may not.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ValidationError, WindowError
from .profiles import Profile, Table

__all__ = [
    "BilateralSequence",
    "WeightSequence",
    "MeasureTower",
    "TowerFunction",
    "Status",
    "Verdict",
    "p_norm",
    "validate",
    "scale_by_pow2",
    "log2_sum",
]

SUM_RTOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def scale_by_pow2(values: np.ndarray, log2_factor) -> np.ndarray:
    """Return ``values * 2**log2_factor`` without intermediate over/underflow."""
    f = np.asarray(log2_factor, dtype=np.float64)
    whole = np.floor(f)
    frac = f - whole
    whole = np.clip(whole, -20000, 20000).astype(np.int64)
    return np.ldexp(np.asarray(values, dtype=np.float64) * np.exp2(frac), whole)


def log2_sum(log2_terms: np.ndarray, axis=None) -> np.ndarray:
    """``log2(sum(2**t))`` along ``axis``; ``-inf`` for empty or all-zero sums."""
    t = np.asarray(log2_terms, dtype=np.float64)
    if t.size == 0:
        return np.float64(-np.inf)
    m = np.max(t, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    s = np.sum(np.exp2(t - m), axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        out = np.log2(s) + m
    return np.squeeze(out, axis=axis) if axis is not None else out.reshape(())[()]


def _check_p(p: float) -> float:
    p = float(p)
    if not (p >= 1 and math.isfinite(p)):
        raise ValidationError(f"exponent p must be a finite real >= 1, got {p}")
    return p


# ---------------------------------------------------------------------------
# Sequences in l^p(Z)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BilateralSequence:
    """Finitely supported real sequence indexed by Z.

    Stored as sorted ``indices`` with matching nonzero ``values``; absent
    indices are zero.  ``window`` bounds every stored index.
    """

    indices: np.ndarray
    values: np.ndarray
    window: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        val = np.asarray(self.values, dtype=np.float64).ravel()
        if idx.shape != val.shape:
            raise ValidationError("indices and values differ in length")
        if not np.all(np.isfinite(val)):
            raise ValidationError("sequence values must be finite")
        order = np.argsort(idx, kind="stable")
        idx, val = idx[order], val[order]
        if idx.size > 1 and np.any(np.diff(idx) == 0):
            raise ValidationError("duplicate indices")
        keep = val != 0
        idx, val = idx[keep], val[keep]
        window = int(self.window)
        if window < 1:
            raise ValidationError("window must be a positive integer")
        if idx.size and max(-idx[0], idx[-1]) > window:
            raise WindowError(f"stored index outside window [-{window}, {window}]")
        object.__setattr__(self, "indices", _frozen(idx))
        object.__setattr__(self, "values", _frozen(val))
        object.__setattr__(self, "window", window)

    @classmethod
    def from_dict(cls, entries: Mapping[int, float], window: int | None = None):
        keys = np.fromiter((int(k) for k in entries), dtype=np.int64, count=len(entries))
        vals = np.fromiter((float(v) for v in entries.values()), dtype=np.float64,
                           count=len(entries))
        if window is None:
            window = max(1, int(np.abs(keys).max()) if keys.size else 1)
        return cls(keys, vals, window)

    @classmethod
    def zeros(cls, window: int = 1):
        return cls(np.zeros(0, np.int64), np.zeros(0), window)

    @classmethod
    def unit(cls, index: int = 0, window: int | None = None, value: float = 1.0):
        return cls.from_dict({index: value}, window)

    def to_dict(self) -> dict[int, float]:
        return {int(k): float(v) for k, v in zip(self.indices, self.values)}

    def __getitem__(self, k: int) -> float:
        pos = np.searchsorted(self.indices, k)
        if pos < self.indices.size and self.indices[pos] == k:
            return float(self.values[pos])
        return 0.0

    def __len__(self):
        return int(self.indices.size)

    @property
    def is_zero(self) -> bool:
        return self.indices.size == 0

    def _combine(self, other: "BilateralSequence", sign: float):
        idx = np.union1d(self.indices, other.indices)
        val = np.zeros(idx.size)
        val[np.searchsorted(idx, self.indices)] += self.values
        val[np.searchsorted(idx, other.indices)] += sign * other.values
        return BilateralSequence(idx, val, max(self.window, other.window))

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return BilateralSequence(self.indices, -self.values, self.window)

    def __mul__(self, scalar: float):
        return BilateralSequence(self.indices, float(scalar) * self.values, self.window)

    __rmul__ = __mul__

    def restrict(self, lo: int, hi: int) -> "BilateralSequence":
        keep = (self.indices >= lo) & (self.indices <= hi)
        return BilateralSequence(self.indices[keep], self.values[keep], self.window)

    def norm(self, p: float = 2.0) -> float:
        return p_norm(self, p)

    def __repr__(self):
        return f"BilateralSequence(nnz={len(self)}, window={self.window})"


def _sequence_norm(x: BilateralSequence, p: float) -> float:
    if x.is_zero:
        return 0.0
    a = np.abs(x.values)
    if p == 1.0:
        return float(math.fsum(a))
    s = float(a.max())
    return s * float(np.sum((a / s) ** p)) ** (1.0 / p)


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Positive weights ``w_k`` given by a profile, with bounds over the window.

    ``w_min``/``w_max`` are taken over ``[-M, M]`` intersected with the profile's
    range.  A table profile cannot be evaluated outside its range.
    """

    profile: Profile
    window: int
    w_min: float = field(init=False)
    w_max: float = field(init=False)

    def __post_init__(self):
        window = int(self.window)
        if window < 1:
            raise ValidationError("window must be a positive integer")
        object.__setattr__(self, "window", window)
        ks = _window_range(self.profile, window)
        lw = self.profile.log2(ks)
        object.__setattr__(self, "w_min", float(np.exp2(lw.min())))
        object.__setattr__(self, "w_max", float(np.exp2(lw.max())))

    @classmethod
    def from_table(cls, values, start: int | None = None, window: int | None = None):
        values = np.asarray(values, dtype=np.float64)
        if start is None:
            if values.size % 2 != 1:
                raise ValidationError("symmetric table needs an odd number of entries")
            start = -(values.size // 2)
        if np.any(values <= 0):
            raise ValidationError("weights must be positive")
        table = Table.from_values(start, values)
        if window is None:
            window = max(1, min(-table.lo, table.hi)) if table.lo <= 0 else table.hi
        return cls(table, window)

    def log2(self, k) -> np.ndarray:
        return self.profile.log2(k)

    def __call__(self, k) -> np.ndarray:
        return self.profile(k)

    def describe(self) -> dict:
        return {"window": self.window, "profile": self.profile.describe()}


def _window_range(profile: Profile, window: int) -> np.ndarray:
    lo = max(-window, profile.lo)
    hi = min(window, profile.hi)
    if lo > hi:
        raise ValidationError("window does not meet the profile's index range")
    return np.arange(int(lo), int(hi) + 1)


# ---------------------------------------------------------------------------
# Measure towers
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MeasureTower:
    """Finite model of a dissipative system ``X = disjoint union of f^k(W)``.

    ``levels`` gives ``log2 mu(f^k(W))``.  Each level is split into
    ``len(cell_fractions)`` cells; cell ``i`` of level ``k`` is the image under
    ``f^k`` of cell ``i`` of ``W``.  Without ``cell_log2`` the cell masses are
    ``p_i * mu(f^k(W))`` (no distortion).  With it, ``cell_log2[k - cell_start, i]``
    is ``log2 rho_{k,i}`` and the tower lives only on that table's levels.

    Construction validates the data and fills ``c``, ``d`` (the constants of
    condition (star) for f^-1 and f over the window) and ``K_eff``.
    """

    levels: Profile
    window: int
    cell_fractions: np.ndarray = field(default_factory=lambda: np.ones(1))
    cell_log2: np.ndarray | None = None
    cell_start: int = 0
    K: float = 1.0
    p: float = 1.0
    c: float = field(init=False)
    d: float = field(init=False)
    K_eff: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "p", _check_p(self.p))
        window = int(self.window)
        if window < 1:
            raise ValidationError("window must be a positive integer")
        object.__setattr__(self, "window", window)
        if not (float(self.K) >= 1.0):
            raise ValidationError("distortion constant K must be >= 1")
        fr = np.array(self.cell_fractions, dtype=np.float64).ravel()
        if fr.size < 1 or np.any(~(fr > 0)):
            raise ValidationError("cell fractions must be positive")
        if abs(math.fsum(fr) - 1.0) > SUM_RTOL:
            raise ValidationError(f"cell fractions sum to {math.fsum(fr)!r}, not 1")
        object.__setattr__(self, "cell_fractions", _frozen(fr))
        if self.cell_log2 is not None:
            cl = np.array(self.cell_log2, dtype=np.float64)
            if cl.ndim != 2 or cl.shape[1] != fr.size or cl.shape[0] < 1:
                raise ValidationError("cell mass table must have shape (levels, cells)")
            if not np.all(np.isfinite(cl)):
                raise ValidationError("cell masses must be finite and positive")
            object.__setattr__(self, "cell_log2", _frozen(cl))
            object.__setattr__(self, "cell_start", int(self.cell_start))
        lo, hi = self.domain
        if not (lo <= 0 <= hi):
            raise ValidationError("level 0 (the wandering set W) must be defined")
        c, d, k_eff = self._check()
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "K_eff", k_eff)

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_tables(cls, level_masses, cell_masses=None, start: int | None = None,
                    cell_fractions=None, K: float = 1.0, p: float = 1.0,
                    window: int | None = None) -> "MeasureTower":
        """Build a tower from explicit level masses (and optional cell masses).

        ``start`` is the level of the first entry; by default the table is
        centred on level 0.
        """
        lm = np.asarray(level_masses, dtype=np.float64)
        if start is None:
            if lm.size % 2 != 1:
                raise ValidationError("centred table needs an odd number of levels")
            start = -(lm.size // 2)
        if np.any(~np.isfinite(lm)) or np.any(lm <= 0):
            raise ValidationError("level masses must be finite and positive")
        levels = Table.from_values(start, lm)
        if window is None:
            window = max(1, min(-levels.lo, levels.hi))
        cell_log2 = None
        if cell_masses is not None:
            cm = np.asarray(cell_masses, dtype=np.float64)
            if cm.ndim != 2 or cm.shape[0] != lm.size:
                raise ValidationError("cell masses must have one row per level")
            if np.any(~np.isfinite(cm)) or np.any(cm <= 0):
                raise ValidationError("cell masses must be finite and positive")
            cell_log2 = np.log2(cm)
            if cell_fractions is None:
                cell_fractions = cm[-start] / cm[-start].sum()
        if cell_fractions is None:
            cell_fractions = np.ones(1)
        return cls(levels, window, np.asarray(cell_fractions, dtype=np.float64),
                   cell_log2, start, K, p)

    # -- geometry --------------------------------------------------------------

    @property
    def cells(self) -> int:
        return int(self.cell_fractions.size)

    @property
    def domain(self) -> tuple[float, float]:
        lo, hi = self.levels.domain
        if self.cell_log2 is not None:
            lo = max(lo, self.cell_start)
            hi = min(hi, self.cell_start + self.cell_log2.shape[0] - 1)
        return lo, hi

    @property
    def bounded(self) -> bool:
        lo, hi = self.domain
        return math.isfinite(lo) or math.isfinite(hi)

    def check_levels(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=np.int64)
        lo, hi = self.domain
        if k.size and (k.min() < lo or k.max() > hi):
            raise WindowError(
                f"levels [{int(k.min())}, {int(k.max())}] outside tower range [{lo}, {hi}]"
            )
        return k

    def window_levels(self) -> np.ndarray:
        lo, hi = self.domain
        return np.arange(int(max(lo, -self.window)), int(min(hi, self.window)) + 1)

    # -- masses ----------------------------------------------------------------

    def log2_level_mass(self, k) -> np.ndarray:
        return self.levels.log2(self.check_levels(k))

    def level_mass(self, k) -> np.ndarray:
        return np.exp2(self.log2_level_mass(k))

    @property
    def mass_w(self) -> float:
        return float(np.exp2(self.levels.log2(np.zeros(1, np.int64))[0]))

    def log2_cell_masses(self, k) -> np.ndarray:
        """``log2 rho_{k,i}`` with shape ``(len(k), cells)``."""
        k = self.check_levels(k)
        if self.cell_log2 is not None:
            return self.cell_log2[k - self.cell_start]
        return self.levels.log2(k)[:, None] + np.log2(self.cell_fractions)[None, :]

    # -- validation --------------------------------------------------------------

    def _check(self) -> tuple[float, float, float]:
        ks = self.window_levels()
        if ks.size < 2:
            raise ValidationError("window must contain at least two levels")
        lm = self.levels.log2(ks)
        if not np.all(np.isfinite(lm)):
            raise ValidationError("level masses must be finite and positive")
        lrho = self.log2_cell_masses(ks)
        base = lm[:, None] + np.log2(self.cell_fractions)[None, :]
        if self.cell_log2 is not None:
            total = log2_sum(lrho, axis=1)
            err = np.abs(np.exp2(total - lm) - 1.0)
            if np.any(err > SUM_RTOL):
                bad = int(ks[np.argmax(err)])
                raise ValidationError(f"cell masses on level {bad} do not sum to the level mass")
        dist = np.abs(lrho - base)
        k_eff = float(np.exp2(dist.max()))
        if k_eff > float(self.K) * (1 + SUM_RTOL):
            k_bad, i_bad = np.unravel_index(np.argmax(dist), dist.shape)
            raise ValidationError(
                f"bounded distortion violated at level {int(ks[k_bad])}, cell {int(i_bad)}: "
                f"needs K >= {k_eff:.6g}, declared K = {self.K}"
            )
        if self.cell_log2 is None:
            k_eff = 1.0
        step = lrho[:-1] - lrho[1:]  # log2 rho_{k-1,i} / rho_{k,i}
        c = float(np.exp2(step.max()))
        d = float(np.exp2((-step).max()))
        return c, d, k_eff

    def describe(self) -> dict:
        out = {
            "window": self.window,
            "p": self.p,
            "K": float(self.K),
            "levels": self.levels.describe(),
            "cell_fractions": self.cell_fractions.tolist(),
            "c": self.c,
            "d": self.d,
            "K_eff": self.K_eff,
        }
        if self.cell_log2 is not None:
            out["cell_start"] = self.cell_start
            out["cell_masses"] = np.exp2(self.cell_log2).tolist()
        return out

    def __repr__(self):
        return (f"MeasureTower(levels={self.levels.describe()['kind']}, window={self.window}, "
                f"cells={self.cells}, p={self.p}, c={self.c:.6g}, d={self.d:.6g}, "
                f"K_eff={self.K_eff:.6g})")


def validate(tower: MeasureTower) -> tuple[float, float, float]:
    """Re-check ``tower`` and return ``(c, d, K_eff)``.

    ``c`` bounds ``mu(f^-1(B)) / mu(B)``, ``d`` bounds ``mu(f(B)) / mu(B)`` and
    ``K_eff`` is the tightest distortion constant, all over the window.
    """
    return tower._check()


# ---------------------------------------------------------------------------
# Simple functions on a tower
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TowerFunction:
    """Function constant on each (level, cell); an element of L^p(X).

    ``coefficients[r, i]`` is the value on cell ``i`` of level ``levels[r]``.
    """

    tower: MeasureTower
    levels: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=np.int64).ravel()
        co = np.array(self.coefficients, dtype=np.float64)
        if co.ndim == 1:
            co = co[:, None] * np.ones((1, self.tower.cells))
        if co.shape != (lv.size, self.tower.cells):
            raise ValidationError(
                f"coefficients must have shape ({lv.size}, {self.tower.cells})")
        if not np.all(np.isfinite(co)):
            raise ValidationError("coefficients must be finite")
        order = np.argsort(lv, kind="stable")
        lv, co = lv[order], co[order]
        if lv.size > 1 and np.any(np.diff(lv) == 0):
            raise ValidationError("duplicate levels")
        keep = np.any(co != 0, axis=1)
        lv, co = lv[keep], co[keep]
        self.tower.check_levels(lv)
        object.__setattr__(self, "levels", _frozen(lv))
        object.__setattr__(self, "coefficients", _frozen(co))

    @classmethod
    def zeros(cls, tower: MeasureTower):
        return cls(tower, np.zeros(0, np.int64), np.zeros((0, tower.cells)))

    @classmethod
    def indicator(cls, tower: MeasureTower, levels, value: float = 1.0):
        """``value`` times the indicator of the union of the given levels."""
        lv = np.atleast_1d(np.asarray(levels, dtype=np.int64))
        return cls(tower, lv, np.full((lv.size, tower.cells), float(value)))

    @classmethod
    def from_dict(cls, tower: MeasureTower, entries: Mapping[tuple[int, int], float]):
        lv = sorted({int(k) for k, _ in entries})
        row = {k: r for r, k in enumerate(lv)}
        co = np.zeros((len(lv), tower.cells))
        for (k, i), v in entries.items():
            if not 0 <= i < tower.cells:
                raise ValidationError(f"cell index {i} out of range")
            co[row[int(k)], int(i)] = float(v)
        return cls(tower, np.asarray(lv, dtype=np.int64), co)

    def to_dict(self) -> dict[tuple[int, int], float]:
        out = {}
        for k, row in zip(self.levels, self.coefficients):
            for i, v in enumerate(row):
                if v != 0:
                    out[(int(k), i)] = float(v)
        return out

    @property
    def is_zero(self) -> bool:
        return self.levels.size == 0

    def _combine(self, other: "TowerFunction", sign: float):
        if other.tower is not self.tower:
            raise ValidationError("tower functions live on different towers")
        lv = np.union1d(self.levels, other.levels)
        co = np.zeros((lv.size, self.tower.cells))
        co[np.searchsorted(lv, self.levels)] += self.coefficients
        co[np.searchsorted(lv, other.levels)] += sign * other.coefficients
        return TowerFunction(self.tower, lv, co)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return TowerFunction(self.tower, self.levels, -self.coefficients)

    def __mul__(self, scalar: float):
        return TowerFunction(self.tower, self.levels, float(scalar) * self.coefficients)

    __rmul__ = __mul__

    def norm(self, p: float | None = None) -> float:
        return p_norm(self, p)

    def __repr__(self):
        return f"TowerFunction(levels={self.levels.size}, cells={self.tower.cells})"


def _tower_function_norm(phi: TowerFunction, p: float) -> float:
    if phi.is_zero:
        return 0.0
    a = np.abs(phi.coefficients)
    nz = a > 0
    lrho = phi.tower.log2_cell_masses(phi.levels)
    terms = p * np.log2(a[nz]) + lrho[nz]
    m = float(terms.max())
    s = float(np.sum(np.exp2(terms - m)))
    # 2**(m/p) * s**(1/p), keeping the power of two exact
    return float(scale_by_pow2(s ** (1.0 / p), m / p))


def p_norm(x, p: float | None = None) -> float:
    """The l^p norm of a sequence or the L^p norm of a tower function.

    For tower functions ``p`` defaults to the tower's exponent; the norm is
    ``(sum |c_{k,i}|^p rho_{k,i})^(1/p)``, accumulated relative to the largest
    term so deep levels do not underflow.
    """
    if isinstance(x, BilateralSequence):
        if p is None:
            raise ValidationError("p is required for sequences")
        return _sequence_norm(x, _check_p(p))
    if isinstance(x, TowerFunction):
        return _tower_function_norm(x, _check_p(x.tower.p if p is None else p))
    raise TypeError(f"p_norm is not defined for {type(x).__name__}")


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


class Status(str, enum.Enum):
    SATISFIED = "SatisfiedWithWitness"
    FAILED = "FailedAtHorizon"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Verdict:
    """A finitely computed stand-in for an asymptotic property.

    Always carries the horizon it was computed at; ``witness`` is the
    iterate that certified success, if any.
    """

    status: Status
    horizon: int
    witness: int | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return self.status is Status.SATISFIED

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "witness": self.witness,
            "horizon": self.horizon,
            "diagnostics": self.diagnostics,
        }
