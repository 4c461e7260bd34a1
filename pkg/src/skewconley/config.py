"""Flat run configuration: one ``dotted.key = value`` per line.

Values are JSON (numbers, strings in double quotes, lists, ``true``/``false``,
``null``); a bare word that is not valid JSON is taken as a string. ``#``
starts a comment line. Unknown keys are rejected, except free-form system
parameters under ``system.params.``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ConfigError

DEFAULTS: dict[str, object] = {
    "system.name": "double-well",
    "system.h": None,                 # integrator step; None keeps the builtin's
    "system.blowup": None,
    "grid.lo": None,                  # per-axis window; None uses the system window
    "grid.hi": None,
    "grid.depth": 6,                  # int or per-axis list
    "grid.circular": None,
    "base.m": None,                   # None: 1 for trivial bases, 8 otherwise
    "base.T": None,                   # required for the trivial base
    "transition.scheme": "corners+center",
    "transition.eps_pad": None,       # None: one box diameter
    "transition.spread_factor": 0.0,
    "transition.escape": "absorb",
    "lyapunov.horizon": 20.0,
    "lyapunov.dt": 0.01,
    "lyapunov.trace_starts": [],      # states for t,lambda,g,l_partial traces
    "lyapunov.trace_pair": 0,
    "pullback.p": 0.0,
    "pullback.U_lo": None,            # None: the grid window
    "pullback.U_hi": None,
    "pullback.tau": 1.0,
    "pullback.steps": 5,
    "pullback.schedule": None,        # explicit list overrides tau/steps
    "pullback.tol": None,             # None: one box diameter
    "pullback.eps_pad": 0.0,
    "pullback.A_lo": None,            # target set for the distance series; None: A_approx
    "pullback.A_hi": None,
    "output.dir": "out",
    "seed": 0,
    "workers": 1,
}

PARAM_PREFIX = "system.params."


def _parse_value(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def loads_config(text: str) -> dict:
    cfg = dict(DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS and not (key.startswith(PARAM_PREFIX) and len(key) > len(PARAM_PREFIX)):
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        cfg[key] = _parse_value(value)
    validate(cfg)
    return cfg


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads_config(text)


def dumps_config(cfg: dict) -> str:
    keys = list(DEFAULTS) + sorted(k for k in cfg if k.startswith(PARAM_PREFIX))
    return "".join(f"{k} = {json.dumps(cfg.get(k, DEFAULTS.get(k)))}\n" for k in keys)


def params(cfg: dict) -> dict:
    return {k[len(PARAM_PREFIX):]: v for k, v in cfg.items() if k.startswith(PARAM_PREFIX)}


def _check(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def validate(cfg: dict) -> None:
    num = (int, float)
    _check(isinstance(cfg["system.name"], str), "system.name must be a string")
    for key in ("system.h", "system.blowup", "base.T", "transition.eps_pad", "pullback.tol"):
        v = cfg[key]
        _check(v is None or (isinstance(v, num) and not isinstance(v, bool) and v >= 0), f"{key} must be a number >= 0")
    d = cfg["grid.depth"]
    _check(isinstance(d, int) or (isinstance(d, list) and all(isinstance(x, int) for x in d)),
           "grid.depth must be an integer or a list of integers")
    for key in ("grid.lo", "grid.hi", "pullback.U_lo", "pullback.U_hi", "pullback.A_lo", "pullback.A_hi"):
        v = cfg[key]
        _check(v is None or isinstance(v, num) or (isinstance(v, list) and all(isinstance(x, num) for x in v)),
               f"{key} must be a number or a list of numbers")
    _check(cfg["base.m"] is None or (isinstance(cfg["base.m"], int) and cfg["base.m"] >= 1), "base.m must be >= 1")
    _check(cfg["transition.escape"] in ("absorb", "drop"), "transition.escape must be 'absorb' or 'drop'")
    s = cfg["transition.scheme"]
    _check(s == "corners+center" or (isinstance(s, int) and s >= 1),
           "transition.scheme must be 'corners+center' or a points-per-axis count")
    for key in ("lyapunov.horizon", "lyapunov.dt", "pullback.tau"):
        _check(isinstance(cfg[key], num) and cfg[key] > 0, f"{key} must be > 0")
    _check(isinstance(cfg["pullback.steps"], int) and cfg["pullback.steps"] >= 1, "pullback.steps must be >= 1")
    sched = cfg["pullback.schedule"]
    _check(sched is None or (isinstance(sched, list) and sched and all(isinstance(x, num) for x in sched)),
           "pullback.schedule must be a non-empty list of times")
    _check(isinstance(cfg["lyapunov.trace_starts"], list), "lyapunov.trace_starts must be a list")
    _check(isinstance(cfg["seed"], int), "seed must be an integer")
    _check(isinstance(cfg["workers"], int) and cfg["workers"] >= 1, "workers must be >= 1")


def schedule(cfg: dict) -> list[float]:
    if cfg["pullback.schedule"] is not None:
        return [float(s) for s in cfg["pullback.schedule"]]
    return [cfg["pullback.tau"] * k for k in range(1, cfg["pullback.steps"] + 1)]
