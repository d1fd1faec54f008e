"""Batch front end: classify, conjugacy-check, orbit and sweep experiments.

Every command reads one JSON config, writes ``<command>_report.json`` (and
``orbit.csv`` for ``orbit``) into ``--out``, and exits with

    0  run completed (whatever the verdicts)
    2  config error
    3  window / domain error
    4  invariant violation
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from .conjugacy import check_semiconjugacy, derive_weights, factor_map, lift
from .core_types import BilateralSequence, MeasureTower, TowerFunction, WeightSequence, p_norm
from .criteria import CriteriaConfig, build_periodic_point, classify
from .densities import HitSet, default_window_lengths, lower_density
from .errors import InvariantViolation, ValidationError, WindowError
from .generators import random_sequence, random_tower_function, tower_from_profile, \
    tower_from_weights
from .orbits import frequent_recurrence_evidence
from .profiles import Constant, Geometric, Harmonic, Step

EXIT_OK, EXIT_CONFIG, EXIT_WINDOW, EXIT_INVARIANT = 0, 2, 3, 4

_profile = {"oneOf": [{"type": "string"},
                      {"type": "object", "required": ["kind"]}]}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "seed": {"type": "integer"},
        "p": {"type": "number", "minimum": 1},
        "tower": {
            "type": "object",
            "properties": {
                "profile": _profile,
                "window": {"type": "integer", "minimum": 1},
                "cells": {"oneOf": [{"type": "integer", "minimum": 1},
                                    {"type": "array", "items": {"type": "number"}}]},
                "K": {"type": "number", "minimum": 1},
                "mass_w": {"type": "number", "exclusiveMinimum": 0},
                "level_masses": {"type": "array", "items": {"type": "number"}},
                "cell_masses": {"type": "array", "items": {"type": "array"}},
                "start": {"type": "integer"},
            },
        },
        "weights": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["constant", "step", "geometric", "harmonic", "table"]},
                "window": {"type": "integer", "minimum": 1},
                "mass_w": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "criteria": {
            "type": "object",
            "properties": {
                "N_list": {"type": "array", "minItems": 1,
                           "items": {"type": "integer", "minimum": 0}},
                "eps_list": {"type": "array", "minItems": 1,
                             "items": {"type": "number", "exclusiveMinimum": 0}},
                "horizon": {"type": ["integer", "null"], "minimum": 1},
                "ratio_threshold": {"type": "number", "exclusiveMinimum": 0,
                                    "exclusiveMaximum": 1},
            },
        },
        "orbit": {
            "type": "object",
            "properties": {
                "operator": {"enum": ["shift", "composition"]},
                "vector": {"type": "object", "required": ["kind"]},
                "delta_grid": {"type": ["array", "null"], "items": {"type": "number"}},
                "relative_delta": {"type": "boolean"},
                "n_max": {"type": "integer", "minimum": 1},
                "density_threshold": {"type": "number", "minimum": 0},
                "tail_start": {"type": "integer", "minimum": 1},
            },
        },
        "conjugacy": {
            "type": "object",
            "properties": {
                "trials": {"type": "integer"},
                "lift_trials": {"type": "integer", "minimum": 0},
                "n_steps": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "window": {"type": "integer", "minimum": 2},
                "profiles": {"type": "array", "items": _profile},
                "cells": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            },
        },
        "sweep": {
            "type": "object",
            "properties": {
                "profiles": {"type": "array", "items": _profile},
                "seeds": {"oneOf": [{"type": "integer", "minimum": 1},
                                    {"type": "array", "items": {"type": "integer"}}]},
                "K_values": {"type": "array", "items": {"type": "number", "minimum": 1}},
                "cells": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "window": {"type": "integer", "minimum": 2},
            },
        },
    },
}

DEFAULT_SWEEP_PROFILES = [{"kind": "geometric", "ratio_range": [0.05, 0.95]}, "flat", "harmonic"]
DEFAULT_CONJUGACY_PROFILES = ["geometric", "flat", "harmonic", "random_distorted"]


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config -> objects
# ---------------------------------------------------------------------------


def load_config(path, seed=None, horizon=None) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc
    if seed is not None:
        cfg["seed"] = int(seed)
    if horizon is not None:
        cfg.setdefault("criteria", {})["horizon"] = int(horizon)
    cfg.setdefault("seed", 0)
    return cfg


def weights_from_config(section: dict) -> WeightSequence:
    kind = section["kind"]
    window = int(section.get("window", 64))
    if kind == "constant":
        profile = Constant(float(section.get("value", 1.0)))
    elif kind == "step":
        profile = Step(float(section["left"]), float(section["right"]))
    elif kind == "geometric":
        profile = Geometric(float(section["ratio"]), float(section.get("scale", 1.0)))
    elif kind == "harmonic":
        profile = Harmonic(float(section.get("scale", 1.0)))
    else:
        values = section["values"]
        return WeightSequence.from_table(values, section.get("start"), section.get("window"))
    return WeightSequence(profile, window)


def tower_from_config(cfg: dict) -> MeasureTower:
    p = float(cfg.get("p", 1.0))
    if "tower" in cfg:
        section = cfg["tower"]
        if "level_masses" in section:
            return MeasureTower.from_tables(
                section["level_masses"], section.get("cell_masses"), section.get("start"),
                section.get("cells") if isinstance(section.get("cells"), list) else None,
                float(section.get("K", 1.0)), p, section.get("window"))
        if "profile" not in section:
            raise ConfigError("tower needs 'profile' or 'level_masses'")
        return tower_from_profile(section["profile"], int(section.get("window", 64)),
                                  section.get("cells", 1), float(section.get("K", 1.0)),
                                  cfg["seed"], p=p, mass_w=float(section.get("mass_w", 1.0)))
    if "weights" in cfg:
        w = weights_from_config(cfg["weights"])
        return tower_from_weights(w, p, float(cfg["weights"].get("mass_w", 1.0)))
    raise ConfigError("config needs a 'tower' or 'weights' section")


def criteria_from_config(cfg: dict) -> CriteriaConfig:
    c = cfg.get("criteria", {})
    base = CriteriaConfig()
    return CriteriaConfig(
        N_list=tuple(c.get("N_list", base.N_list)),
        eps_list=tuple(c.get("eps_list", base.eps_list)),
        horizon=c.get("horizon", base.horizon),
        ratio_threshold=float(c.get("ratio_threshold", base.ratio_threshold)),
    )


def _vector(section: dict, tower: MeasureTower, weights: WeightSequence, p: float, window: int):
    kind = section["kind"]
    if kind == "unit":
        return BilateralSequence.unit(int(section.get("index", 0)), window,
                                      float(section.get("value", 1.0)))
    if kind == "entries":
        entries = {int(k): float(v) for k, v in section["entries"].items()}
        return BilateralSequence.from_dict(entries, max([window] + [abs(k) for k in entries]))
    if kind == "periodic_point":
        horizon = int(section.get("horizon", window))
        pp = build_periodic_point(weights, int(section.get("period", 1)),
                                  float(section.get("seed", 1.0)), horizon, p)
        return pp.point
    if kind == "level_indicator":
        return TowerFunction.indicator(tower, section["levels"], float(section.get("value", 1.0)))
    if kind == "coefficients":
        return TowerFunction(tower, np.asarray(section["levels"]), np.asarray(section["values"]))
    raise ConfigError(f"unknown vector kind {kind!r}")


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def write_report(out: Path, command: str, body: dict, started: float) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    doc = {
        "command": command,
        "body": _clean(body),
        "meta": {
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "runtime_s": round(time.perf_counter() - started, 6),
        },
    }
    path = out / f"{command.replace('-', '_')}_report.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_classify(cfg: dict, out: Path) -> int:
    started = time.perf_counter()
    tower = tower_from_config(cfg)
    result = classify(tower, criteria_from_config(cfg))
    body = {"input": cfg, "seed": cfg["seed"], "tower": tower.describe(),
            "classification": result.to_json()}
    write_report(out, "classify", body, started)
    for flag, status in result.statuses().items():
        print(f"{flag:26s} {status.value}")
    return EXIT_OK


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def cmd_conjugacy_check(cfg: dict, out: Path) -> int:
    started = time.perf_counter()
    c = cfg.get("conjugacy", {})
    trials = int(c.get("trials", 1000))
    if trials < 1:
        raise ConfigError("conjugacy.trials must be >= 1")
    lift_trials = int(c.get("lift_trials", trials))
    n_steps = int(c.get("n_steps", 10))
    tol = float(c.get("tol", 1e-9))
    window = int(c.get("window", 64))
    profiles = c.get("profiles", DEFAULT_CONJUGACY_PROFILES)
    cells_choices = c.get("cells", [1, 2, 3])
    p_choices = [1.0, 1.5, 2.0, 3.0] if "p" not in cfg else [float(cfg["p"])]
    if n_steps >= window:
        raise ConfigError("conjugacy.n_steps must be smaller than the window")
    seed = cfg["seed"]

    def make_tower(t: int, rng):
        profile = profiles[t % len(profiles)]
        cells = int(rng.choice(cells_choices))
        p = float(rng.choice(p_choices))
        return tower_from_profile(profile, window, cells, 1.0, [seed, t], p=p)

    semi_max, failures = 0.0, 0
    for t in range(trials):
        rng = np.random.default_rng([seed, t, 1])
        tower = make_tower(t, rng)
        phi = random_tower_function(tower, rng, -window + n_steps, window)
        rep = check_semiconjugacy(tower, phi, n_steps, tol)
        semi_max = max(semi_max, rep.max_residual / rep.scale)
        failures += not rep.passed
    norm_err = inverse_err = 0.0
    for t in range(lift_trials):
        rng = np.random.default_rng([seed, t, 2])
        tower = make_tower(t, rng)
        y = random_sequence(rng, window)
        phi = lift(tower, y)
        ny = p_norm(y, tower.p)
        norm_err = max(norm_err, _rel(p_norm(phi), ny))
        inverse_err = max(inverse_err, p_norm(factor_map(tower, phi) - y, tower.p) / ny)
    body = {
        "input": cfg,
        "seed": seed,
        "semiconjugacy": {"trials": trials, "n_steps": n_steps, "tol": tol,
                          "max_relative_residual": semi_max, "failures": failures},
        "lift": {"trials": lift_trials, "max_norm_rel_error": norm_err,
                 "max_right_inverse_rel_error": inverse_err},
        "passed": failures == 0,
    }
    write_report(out, "conjugacy-check", body, started)
    print(f"semiconjugacy: max relative residual {semi_max:.3e} over {trials} trials, "
          f"{failures} failures")
    print(f"lift: norm error {norm_err:.3e}, right-inverse error {inverse_err:.3e}")
    return EXIT_OK


def _running_window_max(indicator: np.ndarray, L: int) -> np.ndarray:
    """For each N, the best density of a length-L window inside [1, N]."""
    H = indicator.size
    cs = np.concatenate([[0], np.cumsum(indicator)])
    out = np.empty(H)
    n = np.arange(1, H + 1)
    short = n < L
    out[short] = cs[1:][short] / n[short]
    if H >= L:
        win = (cs[L:] - cs[:-L]) / L  # window ending at N = L..H
        out[L - 1:] = np.maximum.accumulate(win)
    return out


def cmd_orbit(cfg: dict, out: Path) -> int:
    started = time.perf_counter()
    o = cfg.get("orbit")
    if not o or "vector" not in o:
        raise ConfigError("orbit section with a 'vector' is required")
    tower = tower_from_config(cfg)
    weights = derive_weights(tower)
    if "weights" in cfg and "tower" not in cfg:
        weights = weights_from_config(cfg["weights"])
    p = tower.p
    n_max = int(o.get("n_max", 200))
    operator = o.get("operator", "shift")
    x = _vector(o["vector"], tower, weights, p, tower.window)
    if operator == "shift":
        op = weights
        if isinstance(x, TowerFunction):
            x = factor_map(tower, x)
    else:
        op = tower
        if isinstance(x, BilateralSequence):
            x = lift(tower, x)
    norm = p_norm(x, p)
    grid = o.get("delta_grid")
    if grid is not None and o.get("relative_delta", False):
        grid = [g * norm for g in grid]
    ev = frequent_recurrence_evidence(op, x, grid, n_max, float(o.get("density_threshold", 0.01)),
                                      p=p, tail_start=o.get("tail_start"))
    csv_delta = ev.per_delta[-1].delta
    ind = ev.distances < csv_delta
    hits = HitSet.from_indicator(ind)
    lengths = default_window_lengths(n_max)
    L = lengths[-1]
    running_lower = lower_density(hits, 1).profile
    running_window = _running_window_max(ind.astype(np.int64), L)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "orbit.csv", "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["n", "distance", "hit", "lower_density", "window_max_density"])
        for n in range(1, n_max + 1):
            wr.writerow([n, repr(float(ev.distances[n - 1])), int(ind[n - 1]),
                         repr(float(running_lower[n - 1])), repr(float(running_window[n - 1]))])
    body = {"input": cfg, "seed": cfg["seed"], "operator": operator, "p": p,
            "vector_norm": norm, "evidence": ev.to_json(), "csv": {
                "file": "orbit.csv", "delta": csv_delta, "window_length": L}}
    write_report(out, "orbit", body, started)
    print(f"{ev.evidence.value} (n_max={n_max}, deltas={[r.delta for r in ev.per_delta]})")
    return EXIT_OK


def _sweep_profile(profile, rng):
    if isinstance(profile, dict) and "ratio_range" in profile:
        lo, hi = profile["ratio_range"]
        prof = {k: v for k, v in profile.items() if k != "ratio_range"}
        prof["ratio"] = float(rng.uniform(lo, hi))
        return prof
    return profile


def _profile_name(profile) -> str:
    return profile if isinstance(profile, str) else profile["kind"]


def sweep_trial(profile, seed: int, K: float, cells_choices, window: int, p: float,
                crit: CriteriaConfig) -> dict:
    """Classify one generated tower and cross-check it through the shift route."""
    rng = np.random.default_rng([seed, 17])
    prof = _sweep_profile(profile, rng)
    cells = int(rng.choice(cells_choices))
    tower = tower_from_profile(prof, window, cells, K, seed, p=p)
    row = {"profile": _profile_name(profile), "params": prof, "seed": seed, "K": K,
           "cells": cells}
    try:
        result = classify(tower, crit)
    except InvariantViolation as exc:
        row.update(invariants_ok=False, violation=str(exc), shift_route="not run")
        return row
    row["statuses"] = {k: v.value for k, v in result.statuses().items()}
    row["invariants_ok"] = not result.violations()
    if K == 1.0:
        via_shift = classify(tower_from_weights(derive_weights(tower), p, tower.mass_w), crit)
        agree = via_shift.statuses() == result.statuses()
        row["shift_route"] = "agree" if agree else "disagree"
        if not agree:
            row["shift_route_statuses"] = {k: v.value for k, v in via_shift.statuses().items()}
    else:
        row["shift_route"] = "skipped: K > 1"
    return row


def cmd_sweep(cfg: dict, out: Path) -> int:
    started = time.perf_counter()
    s = cfg.get("sweep", {})
    profiles = s.get("profiles", DEFAULT_SWEEP_PROFILES)
    if not profiles:
        raise ConfigError("sweep.profiles must be non-empty")
    seeds = s.get("seeds", 100)
    base = cfg["seed"]
    seeds = [base + i for i in range(seeds)] if isinstance(seeds, int) else list(seeds)
    K_values = [float(k) for k in s.get("K_values", [1.0])]
    cells_choices = s.get("cells", [1, 2, 3])
    window = int(s.get("window", 64))
    p = float(cfg.get("p", 1.0))
    crit = criteria_from_config(cfg)
    rows = [sweep_trial(prof, sd, K, cells_choices, window, p, crit)
            for prof in profiles for K in K_values for sd in seeds]
    summary = {}
    for r in rows:
        key = f"{r['profile']} K={r['K']:g}"
        e = summary.setdefault(key, {"towers": 0, "invariants_ok": 0, "shift_agree": 0,
                                     "shift_disagree": 0, "shift_skipped": 0})
        e["towers"] += 1
        e["invariants_ok"] += r["invariants_ok"]
        route = r["shift_route"]
        e["shift_agree" if route == "agree" else
          "shift_disagree" if route == "disagree" else "shift_skipped"] += 1
    violations = sum(not r["invariants_ok"] for r in rows)
    disagreements = sum(r["shift_route"] == "disagree" for r in rows)
    body = {"input": cfg, "seed": base, "criteria": crit.to_json(), "towers": len(rows),
            "invariant_violations": violations, "shift_route_disagreements": disagreements,
            "summary": summary, "trials": rows}
    write_report(out, "sweep", body, started)
    print(f"{'family':24s} {'towers':>6s} {'inv ok':>6s} {'agree':>6s} {'differ':>6s} {'skip':>6s}")
    for key, e in summary.items():
        print(f"{key:24s} {e['towers']:6d} {e['invariants_ok']:6d} {e['shift_agree']:6d} "
              f"{e['shift_disagree']:6d} {e['shift_skipped']:6d}")
    return EXIT_INVARIANT if violations or disagreements else EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "conjugacy-check": cmd_conjugacy_check,
    "orbit": cmd_orbit,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="towerdyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--out", default=".", help="output directory (default: .)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--horizon", type=int, default=None,
                        help="override criteria.horizon")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.seed, args.horizon)
        return COMMANDS[args.command](cfg, Path(args.out))
    except (ConfigError, ValidationError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (WindowError, OverflowError) as exc:
        print(f"window error: {exc}", file=sys.stderr)
        return EXIT_WINDOW
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
