"""One JSON config drives every CLI subcommand; unused sections are
simply ignored by commands that do not need them.

Layout (all sections optional unless a command needs them):

    {
      "plant":   {"A": [[...]], "B": [[...]], "C": [[...]],
                  "K": [[...]], "L": [[...]]},
      "delays":  {"d1": {"a":..., "b":..., "alpha":..., "omega":..., "varphi":...},
                  "d2": {...}},
      "init":    {"Z0": [...], "xi0": [...],
                  "u_history": {"kind": "constant", "value": [...]} |
                               {"kind": "table", "times": [...], "values": [[...]]},
                  "z_history": {...}},
      "horizon": {"method": "oracle", "h": 1e-3, "window": 1.0},
      "sim":     {"T": 12.0, "dt": 1e-3}
    }

Named built-in configs (for --config NAME without a path) live in the
packaged configs/ directory.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .delays import DelayPair, DelayParams
from .errors import ConfigError
from .plant import HistorySpec, InitialData, PlantSpec

_DELAY_FIELDS = ("a", "b", "alpha", "omega", "varphi")


def load_config(source) -> dict:
    """Read a config from a filesystem path or a packaged name."""
    path = Path(source)
    if not path.exists() and not str(source).endswith(".cfg") and "/" not in str(source):
        try:
            text = (resources.files("delaypred") / "configs" / f"{source}.cfg").read_text()
        except (FileNotFoundError, ModuleNotFoundError):
            raise ConfigError(f"no such config file or built-in name: {source!r}")
    else:
        if not path.exists():
            raise ConfigError(f"config file not found: {source}")
        text = path.read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e.msg} (line {e.lineno}, col {e.colno})")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _section(cfg: dict, name: str) -> dict:
    try:
        sec = cfg[name]
    except KeyError:
        raise ConfigError(f"config is missing the {name!r} section")
    if not isinstance(sec, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    return sec


def parse_plant(cfg: dict) -> PlantSpec:
    sec = _section(cfg, "plant")
    mats = {}
    for name in ("A", "B", "C", "K", "L"):
        if name not in sec:
            raise ConfigError(f"plant section is missing matrix {name!r}")
        try:
            mats[name] = np.asarray(sec[name], dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"plant matrix {name!r} is not a numeric array")
    return PlantSpec(**mats)


def _parse_delay(sec: dict, label: str) -> DelayParams:
    missing = [f for f in _DELAY_FIELDS if f not in sec]
    if missing:
        raise ConfigError(f"delay {label!r} is missing fields: {', '.join(missing)}")
    try:
        vals = {f: float(sec[f]) for f in _DELAY_FIELDS}
    except (TypeError, ValueError):
        raise ConfigError(f"delay {label!r} has non-numeric fields")
    return DelayParams(**vals)


def parse_pair(cfg: dict) -> DelayPair:
    sec = _section(cfg, "delays")
    for key in ("d1", "d2"):
        if key not in sec or not isinstance(sec[key], dict):
            raise ConfigError(f"delays section needs an object {key!r}")
    return DelayPair(d1=_parse_delay(sec["d1"], "d1"),
                     d2=_parse_delay(sec["d2"], "d2"))


def _parse_history(sec: dict, label: str) -> HistorySpec:
    kind = sec.get("kind")
    if kind in ("constant", "const"):
        if "value" not in sec:
            raise ConfigError(f"{label}: constant history needs 'value'")
        return HistorySpec.constant(sec["value"])
    if kind == "table":
        if "times" not in sec or "values" not in sec:
            raise ConfigError(f"{label}: table history needs 'times' and 'values'")
        return HistorySpec.table(sec["times"], sec["values"])
    raise ConfigError(f"{label}: history kind must be 'constant' or 'table', got {kind!r}")


def parse_init(cfg: dict, plant: PlantSpec) -> InitialData:
    sec = _section(cfg, "init")
    for key in ("Z0", "xi0"):
        if key not in sec:
            raise ConfigError(f"init section is missing {key!r}")
    u_hist = (_parse_history(sec["u_history"], "u_history")
              if "u_history" in sec else HistorySpec.constant(np.zeros(plant.m)))
    z_hist = (_parse_history(sec["z_history"], "z_history")
              if "z_history" in sec else HistorySpec.constant(sec["Z0"]))
    try:
        return InitialData(Z0=sec["Z0"], xi0=sec["xi0"],
                           u_history=u_hist, z_history=z_hist)
    except (TypeError, ValueError):
        raise ConfigError("init section has non-numeric Z0/xi0")


def parse_sim(cfg: dict) -> tuple[float, float]:
    sec = cfg.get("sim", {})
    try:
        T = float(sec.get("T", 12.0))
        dt = float(sec.get("dt", 1e-3))
    except (TypeError, ValueError):
        raise ConfigError("sim section has non-numeric T/dt")
    if T <= 0 or dt <= 0:
        raise ConfigError("sim section needs T > 0 and dt > 0")
    return T, dt


def parse_horizon(cfg: dict) -> dict:
    sec = cfg.get("horizon", {})
    method = sec.get("method", "oracle")
    try:
        h = float(sec.get("h", 1e-3))
        window = float(sec.get("window", 1.0))
    except (TypeError, ValueError):
        raise ConfigError("horizon section has non-numeric h/window")
    if h <= 0:
        raise ConfigError("horizon section needs h > 0")
    return {"method": method, "h": h, "window": window}
