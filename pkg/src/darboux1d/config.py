"""Strict run-configuration loading.

One TOML file per run.  Unknown keys anywhere are errors; all defaults are
resolved at load time so the emitted provenance record pins the run
byte-for-byte.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .errors import ConfigError
from .grid import DEFAULT_N_NODES, Interval
from .integrate import DEFAULT_ATOL, DEFAULT_RTOL
from .spectral import SCAN_STEP_DEFAULT

_POTENTIAL_KINDS = (
    "zero", "constant", "pt-trig", "backward-partner", "triple-chain", "table", "chain",
)
_TASK_TYPES = ("spectrum", "transform", "diagnose", "reproduce")


@dataclass
class RunConfig:
    potential: dict
    interval: Interval
    task: dict
    tolerances: dict
    config_sha256: str
    source_path: str
    resolved: dict = field(default_factory=dict)


def _complex_of(value, path):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) for v in value
    ):
        return complex(value[0], value[1])
    raise ConfigError(f"{path}: expected a number or [re, im] pair, got {value!r}")


def _require(table, key, path, types, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"{path}: missing required key '{key}'")
        return default
    v = table[key]
    if types is not None and not isinstance(v, types):
        raise ConfigError(f"{path}.{key}: wrong type {type(v).__name__}")
    return v


def _reject_unknown(table, allowed, path):
    for k in table:
        if k not in allowed:
            raise ConfigError(f"unknown key '{path}.{k}' (strict mode)")


def _parse_recipe(tbl, path):
    if not isinstance(tbl, dict):
        raise ConfigError(f"{path}: expected a table")
    typ = _require(tbl, "type", path, str, required=True)
    if typ == "eigenfunction":
        _reject_unknown(tbl, {"type", "index", "energy"}, path)
        out = {"type": typ}
        if "index" in tbl:
            out["index"] = int(tbl["index"])
        if "energy" in tbl:
            out["energy"] = _complex_of(tbl["energy"], f"{path}.energy")
        if ("index" in out) == ("energy" in out):
            raise ConfigError(f"{path}: give exactly one of index / energy")
        return out
    if typ == "combination":
        _reject_unknown(tbl, {"type", "index", "energy", "c"}, path)
        out = {"type": typ, "c": _complex_of(_require(tbl, "c", path, None, required=True),
                                             f"{path}.c")}
        if "index" in tbl:
            out["index"] = int(tbl["index"])
        if "energy" in tbl:
            out["energy"] = _complex_of(tbl["energy"], f"{path}.energy")
        if ("index" in out) == ("energy" in out):
            raise ConfigError(f"{path}: give exactly one of index / energy")
        return out
    if typ == "explicit":
        _reject_unknown(tbl, {"type", "value", "derivative"}, path)
        return {
            "type": typ,
            "value": _complex_of(_require(tbl, "value", path, None, required=True),
                                 f"{path}.value"),
            "derivative": _complex_of(
                _require(tbl, "derivative", path, None, required=True),
                f"{path}.derivative"),
        }
    raise ConfigError(f"{path}.type: unknown recipe type {typ!r}")


def _parse_potential(tbl, path="potential"):
    kind = _require(tbl, "kind", path, str, required=True)
    if kind not in _POTENTIAL_KINDS:
        raise ConfigError(f"{path}.kind: unknown kind {kind!r}; valid: {_POTENTIAL_KINDS}")
    out = {"kind": kind}
    if kind == "zero":
        _reject_unknown(tbl, {"kind"}, path)
    elif kind == "constant":
        _reject_unknown(tbl, {"kind", "value"}, path)
        out["value"] = _complex_of(_require(tbl, "value", path, None, default=0.0),
                                   f"{path}.value")
    elif kind == "pt-trig":
        _reject_unknown(tbl, {"kind", "A", "B"}, path)
        out["A"] = float(_require(tbl, "A", path, (int, float), required=True))
        out["B"] = float(_require(tbl, "B", path, (int, float), required=True))
    elif kind == "backward-partner":
        _reject_unknown(tbl, {"kind", "kappa"}, path)
        out["kappa"] = float(_require(tbl, "kappa", path, (int, float), required=True))
    elif kind == "triple-chain":
        _reject_unknown(tbl, {"kind"}, path)
    elif kind == "table":
        _reject_unknown(tbl, {"kind", "path"}, path)
        out["path"] = str(_require(tbl, "path", path, str, required=True))
    elif kind == "chain":
        _reject_unknown(tbl, {"kind", "base", "transform"}, path)
        base = _require(tbl, "base", path, dict, required=True)
        out["base"] = _parse_potential(base, f"{path}.base")
        if out["base"]["kind"] == "chain":
            raise ConfigError(f"{path}.base: chains do not nest; list more transforms instead")
        transforms = _require(tbl, "transform", path, list, required=True)
        if not transforms:
            raise ConfigError(f"{path}.transform: need at least one transformation")
        out["transform"] = []
        for i, t in enumerate(transforms):
            tp = f"{path}.transform[{i}]"
            if not isinstance(t, dict):
                raise ConfigError(f"{tp}: expected a table")
            _reject_unknown(t, {"alpha1", "u1", "alpha2", "u2"}, tp)
            alpha1 = _complex_of(_require(t, "alpha1", tp, None, required=True), f"{tp}.alpha1")
            alpha2 = _complex_of(_require(t, "alpha2", tp, None, required=True), f"{tp}.alpha2")
            if abs(alpha1 - alpha2) < 1e-12:
                raise ConfigError(f"{tp}: alpha1 = alpha2 is not a valid transformation")
            out["transform"].append({
                "alpha1": alpha1,
                "u1": _parse_recipe(_require(t, "u1", tp, dict, required=True), f"{tp}.u1"),
                "alpha2": alpha2,
                "u2": _parse_recipe(_require(t, "u2", tp, dict, required=True), f"{tp}.u2"),
            })
    return out


def _parse_interval(tbl):
    if tbl is None:
        return Interval(-math.pi, math.pi, DEFAULT_N_NODES)
    _reject_unknown(tbl, {"a", "b", "n_nodes"}, "interval")
    a = float(_require(tbl, "a", "interval", (int, float), default=-math.pi))
    b = float(_require(tbl, "b", "interval", (int, float), default=math.pi))
    n = int(_require(tbl, "n_nodes", "interval", int, default=DEFAULT_N_NODES))
    try:
        return Interval(a, b, n)
    except ValueError as err:
        raise ConfigError(f"interval: {err}") from None


def _parse_task(tbl):
    typ = _require(tbl, "type", "task", str, required=True)
    if typ not in _TASK_TYPES:
        raise ConfigError(f"task.type: unknown type {typ!r}; valid: {_TASK_TYPES}")
    out = {"type": typ}
    if typ == "spectrum":
        _reject_unknown(tbl, {"type", "e_min", "e_max", "rect", "eigenfunctions"}, "task")
        has_window = "e_min" in tbl or "e_max" in tbl
        has_rect = "rect" in tbl
        if has_window == has_rect:
            raise ConfigError("task: spectrum needs either e_min/e_max or rect")
        if has_window:
            out["e_min"] = float(_require(tbl, "e_min", "task", (int, float), required=True))
            out["e_max"] = float(_require(tbl, "e_max", "task", (int, float), required=True))
        else:
            rect = tbl["rect"]
            if not (isinstance(rect, list) and len(rect) == 4):
                raise ConfigError("task.rect: expected [re_min, re_max, im_min, im_max]")
            out["rect"] = tuple(float(v) for v in rect)
        out["eigenfunctions"] = bool(_require(tbl, "eigenfunctions", "task", bool,
                                              default=False))
    elif typ == "diagnose":
        _reject_unknown(tbl, {"type", "level", "rect"}, "task")
        if ("level" in tbl) == ("rect" in tbl):
            raise ConfigError("task: diagnose needs either level or rect")
        if "level" in tbl:
            out["level"] = _complex_of(tbl["level"], "task.level")
        else:
            rect = tbl["rect"]
            if not (isinstance(rect, list) and len(rect) == 4):
                raise ConfigError("task.rect: expected [re_min, re_max, im_min, im_max]")
            out["rect"] = tuple(float(v) for v in rect)
    elif typ == "transform":
        _reject_unknown(tbl, {"type"}, "task")
    elif typ == "reproduce":
        _reject_unknown(tbl, {"type", "scenario", "B", "kappa"}, "task")
        out["scenario"] = str(_require(tbl, "scenario", "task", str, required=True))
        if "B" in tbl:
            out["B"] = float(tbl["B"])
        if "kappa" in tbl:
            out["kappa"] = float(tbl["kappa"])
    return out


def _parse_tolerances(tbl):
    out = {"ode_rtol": DEFAULT_RTOL, "ode_atol": DEFAULT_ATOL,
           "scan_step": SCAN_STEP_DEFAULT}
    if tbl is None:
        return out
    _reject_unknown(tbl, set(out), "tolerances")
    for k in out:
        if k in tbl:
            out[k] = float(tbl[k])
    return out


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw_bytes = path.read_bytes()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from None
    try:
        data = tomllib.loads(raw_bytes.decode("utf-8"))
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as err:
        raise ConfigError(f"config parse error in {path}: {err}") from None

    _reject_unknown(data, {"potential", "interval", "task", "tolerances"}, "<root>")
    if "potential" not in data:
        raise ConfigError("missing [potential] section")
    if "task" not in data:
        raise ConfigError("missing [task] section")

    interval = _parse_interval(data.get("interval"))
    cfg = RunConfig(
        potential=_parse_potential(data["potential"]),
        interval=interval,
        task=_parse_task(data["task"]),
        tolerances=_parse_tolerances(data.get("tolerances")),
        config_sha256=hashlib.sha256(raw_bytes).hexdigest(),
        source_path=str(path),
    )
    cfg.resolved = {
        "potential": cfg.potential,
        "interval": {"a": interval.a, "b": interval.b, "n_nodes": interval.n_nodes},
        "task": cfg.task,
        "tolerances": cfg.tolerances,
    }
    return cfg


def build_potential(desc: dict, interval: Interval, tolerances: dict):
    """Materialize a PotentialSpec from a parsed descriptor."""
    from .darboux import (
        CombinationRecipe,
        EigenfunctionRecipe,
        ExplicitRecipe,
        build_transformation_function,
        darboux_potential,
    )
    from .potentials import (
        BackwardPartnerPotential,
        ConstantPotential,
        TabulatedPotential,
        TripleChainPotential,
        TrigPTPotential,
    )

    kind = desc["kind"]
    if kind == "zero":
        return ConstantPotential(0.0, interval)
    if kind == "constant":
        return ConstantPotential(desc["value"], interval)
    if kind == "pt-trig":
        return TrigPTPotential(desc["A"], desc["B"], interval)
    if kind == "backward-partner":
        return BackwardPartnerPotential(desc["kappa"], interval)
    if kind == "triple-chain":
        return TripleChainPotential(interval)
    if kind == "table":
        rows = np.loadtxt(desc["path"], delimiter=",", comments="#")
        if rows.ndim != 2 or rows.shape[1] not in (2, 3):
            raise ConfigError(
                f"table file {desc['path']}: expected columns x, Re V[, Im V]"
            )
        if rows.shape[0] != interval.n_nodes:
            raise ConfigError(
                f"table file {desc['path']}: {rows.shape[0]} rows, need "
                f"{interval.n_nodes} (one per grid node)"
            )
        samples = rows[:, 1] + (1j * rows[:, 2] if rows.shape[1] == 3 else 0.0)
        return TabulatedPotential(interval, samples)
    if kind == "chain":
        V = build_potential(desc["base"], interval, tolerances)
        rtol = tolerances["ode_rtol"]
        atol = tolerances["ode_atol"]
        results = []
        for t in desc["transform"]:
            u1 = build_transformation_function(
                V, t["alpha1"], _recipe_object(t["u1"]), rtol=rtol, atol=atol)
            u2 = build_transformation_function(
                V, t["alpha2"], _recipe_object(t["u2"]), rtol=rtol, atol=atol)
            res = darboux_potential(u1, u2, V, rtol=rtol, atol=atol)
            results.append(res)
            V = res.potential
        V.extras["chain_results"] = results
        return V
    raise ConfigError(f"unknown potential kind {kind!r}")


def _recipe_object(d: dict):
    from .darboux import CombinationRecipe, EigenfunctionRecipe, ExplicitRecipe

    if d["type"] == "eigenfunction":
        return EigenfunctionRecipe(index=d.get("index"), energy=d.get("energy"))
    if d["type"] == "combination":
        return CombinationRecipe(c=d["c"], index=d.get("index"), energy=d.get("energy"))
    return ExplicitRecipe(d["value"], d["derivative"])
