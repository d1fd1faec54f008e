"""Horizon-bounded recurrence, hypercyclicity and chaos verdicts for towers.

Write ``U_N`` for the union of levels ``|j| <= N``.  The composition operator
is hypercyclic (equivalently, recurrent) when for every ``N`` and ``eps`` some
``n > 2N`` has

    mu(f^n(U_N)) < eps   and   mu(f^-n(U_N)) < eps.

Levels are disjoint, so both are sums of ``2N + 1`` level masses.  Chaos
(equivalently frequent hypercyclicity, frequent and reiterative recurrence)
is read from the series ``sum_k mu(f^k(W))``: its partial sums are the
``p``-th powers of the partial norms of the shift's canonical fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core_types import (BilateralSequence, MeasureTower, Status, Verdict, WeightSequence,
                         log2_sum, p_norm, scale_by_pow2)
from .errors import InvariantViolation, ValidationError, WindowError
from .operators import ShiftPowers

__all__ = [
    "CriteriaConfig",
    "Classification",
    "DEFAULT_HORIZON",
    "resolve_horizon",
    "hypercyclicity_criterion",
    "recurrence_criterion",
    "chaos_criterion",
    "PeriodicPoint",
    "build_periodic_point",
    "partial_norms_stabilize",
    "classify",
    "admissible_radius",
    "MassChain",
    "mass_chain",
]

DEFAULT_HORIZON = 32768
TAIL_FRACTION = 0.1
STABLE_RTOL = 1e-9


@dataclass(frozen=True)
class CriteriaConfig:
    """Sampling of the ``for all N, eps`` quantifiers and the truncation horizon.

    ``horizon=None`` picks the largest horizon the tower supports, capped at
    :data:`DEFAULT_HORIZON` for closed-form towers.
    """

    N_list: tuple[int, ...] = (1, 2, 4, 8)
    eps_list: tuple[float, ...] = (1e-1, 1e-2, 1e-3)
    horizon: int | None = None
    ratio_threshold: float = 0.999

    def to_json(self) -> dict:
        return {
            "N_list": list(self.N_list),
            "eps_list": list(self.eps_list),
            "horizon": self.horizon,
            "ratio_threshold": self.ratio_threshold,
        }


def _check_lists(N_list, eps_list):
    N_list = [int(N) for N in N_list]
    eps_list = [float(e) for e in eps_list]
    if not N_list or not eps_list:
        raise ValidationError("N_list and eps_list must be non-empty")
    if min(N_list) < 0:
        raise ValidationError("N values must be non-negative")
    for e in eps_list:
        if not (e > 0 and math.isfinite(e)):
            raise ValidationError(f"eps must be a finite positive real, got {e}")
    return N_list, eps_list


def resolve_horizon(tower: MeasureTower, horizon: int | None, reach: int = 0) -> int:
    """Horizon to use when levels up to ``+-(horizon + reach)`` are needed."""
    lo, hi = tower.domain
    room = min(hi, -lo) - reach
    if horizon is None:
        horizon = DEFAULT_HORIZON if not math.isfinite(room) else int(room)
    horizon = int(horizon)
    if horizon > room:
        raise WindowError(
            f"horizon {horizon} needs levels +-{horizon + reach}, tower stops at [{lo}, {hi}]")
    if horizon < 1:
        raise WindowError("tower too short for any horizon")
    return horizon


# ---------------------------------------------------------------------------
# Measure-decay criterion
# ---------------------------------------------------------------------------


def _block_sums(tower: MeasureTower, N: int, horizon: int):
    """mu(f^n(U_N)) and mu(f^-n(U_N)) for n = 0..horizon.

    Plain double sums of 2N + 1 masses: an overflowing mass becomes inf and an
    underflowing one 0, which leaves every comparison with a positive eps exact.
    """
    R = horizon + N
    with np.errstate(over="ignore", under="ignore"):
        mass = np.exp2(tower.log2_level_mass(np.arange(-R, R + 1)))
    # centred[t] = sum of masses on levels -R + t .. -R + t + 2N, centred at t - horizon
    centred = np.convolve(mass, np.ones(2 * N + 1), mode="valid")
    n = np.arange(horizon + 1)
    return centred[horizon + n], centred[horizon - n]


def _decay_engine(tower: MeasureTower, N_list, eps_list, horizon, name: str) -> Verdict:
    N_list, eps_list = _check_lists(N_list, eps_list)
    maxN = max(N_list)
    horizon = resolve_horizon(tower, horizon, reach=maxN)
    if horizon <= 2 * maxN:
        raise ValidationError(f"horizon {horizon} must exceed 2 * max(N) = {2 * maxN}")
    pairs = []
    all_ok = True
    for N in N_list:
        fwd, bwd = _block_sums(tower, N, horizon)
        worst = np.maximum(fwd, bwd)
        admissible = np.arange(horizon + 1) > 2 * N
        for eps in eps_list:
            ok = admissible & (worst < eps)
            hits = np.flatnonzero(ok)
            entry = {"N": N, "eps": eps}
            if hits.size:
                n = int(hits[0])
                entry.update(witness=n, forward_mass=float(fwd[n]),
                             backward_mass=float(bwd[n]))
            else:
                all_ok = False
                n_best = int(np.argmin(np.where(admissible, worst, np.inf)))
                entry.update(witness=None, min_max_mass=float(worst[n_best]), at_n=n_best)
            pairs.append(entry)
    diagnostics = {"criterion": name, "pairs": pairs}
    if all_ok:
        return Verdict(Status.SATISFIED, horizon, max(e["witness"] for e in pairs), diagnostics)
    return Verdict(Status.FAILED, horizon, None, diagnostics)


def hypercyclicity_criterion(tower: MeasureTower, N_list=(1, 2, 4, 8),
                             eps_list=(1e-1, 1e-2, 1e-3), horizon: int | None = None) -> Verdict:
    """Search ``n in (2N, horizon]`` with both block masses below ``eps``.

    Satisfied when every sampled ``(N, eps)`` pair has a witness; the verdict's
    witness is the largest of the per-pair smallest witnesses, which are listed
    in ``diagnostics['pairs']``.  Otherwise FailedAtHorizon, with the smallest
    achieved ``max(forward, backward)`` mass per pair.
    """
    return _decay_engine(tower, N_list, eps_list, horizon, "hypercyclicity")


def recurrence_criterion(tower: MeasureTower, N_list=(1, 2, 4, 8),
                         eps_list=(1e-1, 1e-2, 1e-3), horizon: int | None = None) -> Verdict:
    """Same computation as :func:`hypercyclicity_criterion`.

    For dissipative composition operators recurrence and hypercyclicity
    coincide, and ``T_f`` is recurrent exactly when ``T_f^-1`` is, so the two-
    sided decay test decides both.
    """
    return _decay_engine(tower, N_list, eps_list, horizon, "recurrence")


# ---------------------------------------------------------------------------
# Quantitative steps behind the decay criterion
# ---------------------------------------------------------------------------


def admissible_radius(eps: float, p: float, c: float, d: float, n: int, m: int) -> float:
    """Supremum of admissible ball radii for accuracy ``eps``.

    Any ``delta`` strictly below ``min(eps^(1/p) / 2, eps^(1/p) / (2 max(c, d)^(|m-n|/p)))``
    turns the return bounds of :func:`mass_chain` into masses below ``eps``.
    """
    root = eps ** (1.0 / p)
    return min(root / 2, root / (2 * max(c, d) ** (abs(m - n) / p)))


@dataclass(frozen=True)
class MassChain:
    """Masses of ``f^n(U_N)``, ``f^-m(U_N)``, ``f^-n(U_N)`` and their bounds."""

    forward: float
    backward_m: float
    backward_n: float
    transfer_constant: float
    transfer_bound: float
    return_bound: float


def mass_chain(tower: MeasureTower, N: int, n: int, m: int, delta: float) -> MassChain:
    """Evaluate the chain that carries a backward bound from ``m`` to ``n``.

    ``mu(f^-n(U_N)) <= c^|n-m| mu(f^-m(U_N))`` when ``m < n`` and with ``d``
    in place of ``c`` when ``m >= n``; ``return_bound`` is ``(2 delta)^p``, the
    mass bound produced by a return into a ``delta``-ball.
    """
    U = np.arange(-N, N + 1)
    mass = lambda levels: float(np.exp2(log2_sum(tower.log2_level_mass(levels))))
    k = tower.c if m < n else tower.d
    t = k ** abs(n - m)
    bm = mass(U - m)
    return MassChain(
        forward=mass(U + n),
        backward_m=bm,
        backward_n=mass(U - n),
        transfer_constant=t,
        transfer_bound=t * bm,
        return_bound=(2 * delta) ** tower.p,
    )


# ---------------------------------------------------------------------------
# Series criterion and its periodic-point oracle
# ---------------------------------------------------------------------------


def chaos_criterion(tower: MeasureTower, horizon: int | None = None,
                    ratio_threshold: float = 0.999) -> Verdict:
    """Convergence of ``sum_k mu(f^k(W))`` judged from its last stretch.

    Over the final 10% of ``[0, horizon]`` on each side, consecutive mass
    ratios all at most ``ratio_threshold`` give a geometric-tail certificate
    (Satisfied).  A side whose terms never drop below the first term of that
    stretch has terms bounded below (FailedAtHorizon).  Anything else is
    Undetermined.
    """
    if not 0 < ratio_threshold < 1:
        raise ValidationError("ratio_threshold must lie in (0, 1)")
    horizon = resolve_horizon(tower, horizon)
    with np.errstate(over="ignore", under="ignore"):
        return _chaos(tower, horizon, ratio_threshold)


def _chaos(tower: MeasureTower, horizon: int, ratio_threshold: float) -> Verdict:
    k = np.arange(-horizon, horizon + 1)
    lm = tower.log2_level_mass(k)
    start = max(1, int(math.floor((1 - TAIL_FRACTION) * horizon)))
    sides = {}
    for side, seq in (("right", lm[horizon:]), ("left", lm[horizon::-1])):
        tail = seq[start:]
        log_ratio = np.diff(tail)
        sides[side] = {
            "max_ratio": float(np.exp2(log_ratio.max())) if log_ratio.size else None,
            "certified": bool(log_ratio.size and log_ratio.max() <= math.log2(ratio_threshold)),
            "bounded_below": bool(tail.min() >= tail[0] + math.log2(1 - 1e-12)),
            "last_term": float(np.exp2(tail[-1])),
        }
    checkpoints = sorted({max(1, horizon // 8), max(1, horizon // 4), max(1, horizon // 2),
                          start, horizon})
    centre = horizon
    partial = []
    for K in checkpoints:
        s = log2_sum(lm[centre - K:centre + K + 1])
        partial.append({"K": K, "log2_sum": float(s), "sum": float(np.exp2(s))})
    diagnostics = {
        "criterion": "chaos",
        "ratio_threshold": ratio_threshold,
        "tail_start": start,
        "sides": sides,
        "partial_sums": partial,
        "mass_w": tower.mass_w,
    }
    if sides["right"]["certified"] and sides["left"]["certified"]:
        status = Status.SATISFIED
    elif sides["right"]["bounded_below"] or sides["left"]["bounded_below"]:
        status = Status.FAILED
    else:
        status = Status.UNDETERMINED
    return Verdict(status, horizon, None, diagnostics)


@dataclass(frozen=True)
class PeriodicPoint:
    """Truncated canonical periodic point of ``B_w`` and how well it closes up.

    ``partial_norms[K]`` is the p-norm of the entries with ``|k| <= K``.
    """

    point: BilateralSequence
    residual: float
    partial_norms: np.ndarray
    p: float

    def __iter__(self):
        yield self.point
        yield self.residual

    @property
    def stabilizes(self) -> bool:
        return partial_norms_stabilize(self.partial_norms)


def partial_norms_stabilize(partial_norms, rtol: float = STABLE_RTOL) -> bool:
    """Relative growth over the last 10% of the horizon below ``rtol``."""
    P = np.asarray(partial_norms, dtype=np.float64)
    H = P.size - 1
    if H < 1 or not np.all(np.isfinite(P)):
        return False
    start = int(math.floor((1 - TAIL_FRACTION) * H))
    if P[H] == 0:
        return True
    return bool((P[H] - P[start]) / P[H] < rtol)


def build_periodic_point(w: WeightSequence, period: int, seed: float, horizon: int,
                         p: float = 1.0) -> PeriodicPoint:
    """Periodic point with ``x_0 = seed`` supported on multiples of ``period``.

    ``x_{jN} = seed / prod_{v=1..jN} w_v`` and
    ``x_{-jN} = seed * prod_{v=0..jN-1} w_{-v}`` for ``|jN| <= horizon``.  The
    residual is ``||B_w^N x - x||_p`` over ``|k| <= horizon - N``, where
    truncation cannot show up.
    """
    N = int(period)
    if N < 1:
        raise ValidationError("period must be >= 1")
    if seed == 0:
        raise ValidationError("seed must be non-zero")
    horizon = int(horizon)
    if horizon < N:
        raise ValidationError("horizon must be at least one period")
    powers = ShiftPowers(w, -horizon - N, horizon)
    J = np.arange(-(horizon // N), horizon // N + 1) * N
    # x_J = seed * 2**(G(0) - G(J)), the factor carrying x_0 to position J
    zero = np.zeros_like(J)
    log2_vals = np.asarray(powers.log2_factor(zero, -J), dtype=np.float64)
    with np.errstate(over="ignore"):
        vals = scale_by_pow2(np.full(J.size, float(seed)), log2_vals)
    if not np.all(np.isfinite(vals)):
        k = int(J[np.argmax(~np.isfinite(vals))])
        raise OverflowError(f"periodic point entry at index {k} exceeds double range; "
                            "the series diverges there")
    x = BilateralSequence(J, vals, max(horizon, 1))
    y = powers.apply(x, N)
    residual = p_norm((y - x).restrict(-(horizon - N), horizon - N), p)
    a = np.zeros(horizon + 1)
    ab = np.abs(x.values) ** p if p != 1 else np.abs(x.values)
    np.add.at(a, np.abs(x.indices), ab)
    partial = np.cumsum(a) ** (1.0 / p)
    return PeriodicPoint(x, float(residual), partial, float(p))


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    """The six dynamical properties, each with its verdict.

    Recurrence and hypercyclicity share one verdict; chaos, frequent
    hypercyclicity, frequent and reiterative recurrence share another.
    Construction rejects any combination that breaks those equivalences or
    claims chaos without hypercyclicity.
    """

    recurrent: Verdict
    hypercyclic: Verdict
    reiteratively_recurrent: Verdict
    frequently_recurrent: Verdict
    frequently_hypercyclic: Verdict
    chaotic: Verdict
    config: dict = field(default_factory=dict)

    FLAGS = ("recurrent", "hypercyclic", "reiteratively_recurrent", "frequently_recurrent",
             "frequently_hypercyclic", "chaotic")

    def __post_init__(self):
        for problem in self.violations():
            raise InvariantViolation(problem)

    def statuses(self) -> dict[str, Status]:
        return {f: getattr(self, f).status for f in self.FLAGS}

    def violations(self) -> list[str]:
        s = self.statuses()
        out = []
        if s["recurrent"] != s["hypercyclic"]:
            out.append("recurrent != hypercyclic")
        if s["frequently_recurrent"] != s["frequently_hypercyclic"]:
            out.append("frequently_recurrent != frequently_hypercyclic")
        if not (s["chaotic"] == s["frequently_hypercyclic"] == s["reiteratively_recurrent"]):
            out.append("chaotic, frequently_hypercyclic, reiteratively_recurrent disagree")
        if s["chaotic"] is Status.SATISFIED and s["hypercyclic"] is not Status.SATISFIED:
            out.append("chaotic without hypercyclic")
        return out

    def to_json(self) -> dict:
        out = {f: getattr(self, f).to_json() for f in self.FLAGS}
        out["config"] = self.config
        return out


def classify(tower: MeasureTower, config: CriteriaConfig | None = None) -> Classification:
    """Run the decay and series criteria and fill all six flags.

    A chaos certificate that the decay criterion does not corroborate within
    the horizon is downgraded to Undetermined, since chaos implies
    hypercyclicity.
    """
    config = config or CriteriaConfig()
    decay = _decay_engine(tower, config.N_list, config.eps_list, config.horizon, "decay")
    series = chaos_criterion(tower, config.horizon, config.ratio_threshold)
    if series.satisfied and not decay.satisfied:
        series = replace(series, status=Status.UNDETERMINED, diagnostics={
            **series.diagnostics, "downgraded": "tail certificate without decay witnesses"})

    def named(v: Verdict, name: str) -> Verdict:
        return replace(v, diagnostics={**v.diagnostics, "criterion": name})

    return Classification(
        recurrent=named(decay, "recurrence"),
        hypercyclic=named(decay, "hypercyclicity"),
        reiteratively_recurrent=named(series, "reiterative_recurrence"),
        frequently_recurrent=named(series, "frequent_recurrence"),
        frequently_hypercyclic=named(series, "frequent_hypercyclicity"),
        chaotic=named(series, "chaos"),
        config=config.to_json(),
    )
