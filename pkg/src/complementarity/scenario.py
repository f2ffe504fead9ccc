"""JSON scenario and sweep-config files.

Scenario schema (``version`` 1)::

    {
      "version": 1,
      "name": "table3",
      "regimes": [{"p": 0.5, "human_loss": 1.15, "algo_loss": 0.2}, ...],
      "combiner": {"type": "tabular", "params": {"weights": [0.25, 0.75]}},
      "analyses": ["complementarity", "impossibility", "conditions", "fairness"]
    }

Combiner types and their params:

    min         {}
    prob_trust  {"p_s": float}
    two_stage   {"epsilon": float,
                 "gap_map": {"kind": "linear", "intercept": float, "slope": float}
                          | {"kind": "table", "gaps": [...], "weights": [...]}}
    exemplar    {"b": float, "m": float}
    constant    {"s": float}
    tabular     {"weights": [float, ...]}
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import ScenarioError
from .model import PROB_TOL, System
from .rules import (RULE_TYPES, Constant, Exemplar, LinearGapMap, Min, ProbTrust,
                    TableGapMap, Tabular, TwoStage, WeightingRule)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SUM_TOL = 1e-6
ANALYSES = ("complementarity", "impossibility", "conditions", "fairness", "assumptions")
BUILTIN = ("table1", "table2", "table3", "table4", "table5", "table6")


@dataclass(frozen=True)
class Regime:
    p: float
    human_loss: float
    algo_loss: float


@dataclass(frozen=True)
class Scenario:
    name: str
    regimes: tuple[Regime, ...]
    combiner: WeightingRule
    analyses: tuple[str, ...] = ANALYSES

    @property
    def system(self) -> System:
        return System.build([r.p for r in self.regimes], [r.human_loss for r in self.regimes],
                            [r.algo_loss for r in self.regimes])


def _number(obj, key, where, lo=None, hi=None):
    if key not in obj:
        raise ScenarioError(f"{where}.{key}: missing")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(f"{where}.{key}: expected a finite number, got {value!r}")
    if lo is not None and value < lo:
        raise ScenarioError(f"{where}.{key}: must be >= {lo}, got {value!r}")
    if hi is not None and value > hi:
        raise ScenarioError(f"{where}.{key}: must be <= {hi}, got {value!r}")
    return float(value)


def _numbers(obj, key, where):
    values = obj.get(key)
    if not isinstance(values, list) or not values:
        raise ScenarioError(f"{where}.{key}: expected a non-empty list of numbers")
    return [_number({key: v}, key, f"{where}.{key}[{i}]".rsplit(".", 1)[0]) for i, v in enumerate(values)]


def rule_to_dict(rule: WeightingRule) -> dict[str, Any]:
    if isinstance(rule, Min):
        params = {}
    elif isinstance(rule, ProbTrust):
        params = {"p_s": rule.p_s}
    elif isinstance(rule, TwoStage):
        if isinstance(rule.gap_map, LinearGapMap):
            gap_map = {"kind": "linear", "intercept": rule.gap_map.intercept,
                       "slope": rule.gap_map.slope}
        else:
            gap_map = {"kind": "table", "gaps": list(rule.gap_map.gaps),
                       "weights": list(rule.gap_map.weights)}
        params = {"epsilon": rule.epsilon, "gap_map": gap_map}
    elif isinstance(rule, Exemplar):
        params = {"b": rule.b, "m": rule.m}
    elif isinstance(rule, Constant):
        params = {"s": rule.s}
    elif isinstance(rule, Tabular):
        params = {"weights": list(rule.s)}
    else:
        raise TypeError(f"cannot serialize {rule!r}")
    return {"type": rule.tag, "params": params}


def rule_from_dict(obj, where: str = "combiner") -> WeightingRule:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where}: expected an object")
    kind = obj.get("type")
    if kind not in RULE_TYPES:
        raise ScenarioError(f"{where}.type: unknown combiner type {kind!r}; "
                            f"valid types are {', '.join(RULE_TYPES)}")
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioError(f"{where}.params: expected an object")
    w = f"{where}.params"
    try:
        if kind == "min":
            return Min()
        if kind == "prob_trust":
            return ProbTrust(_number(params, "p_s", w, 0, 1))
        if kind == "exemplar":
            return Exemplar(_number(params, "b", w), _number(params, "m", w))
        if kind == "constant":
            return Constant(_number(params, "s", w, 0, 1))
        if kind == "tabular":
            weights = _numbers(params, "weights", w)
            for i, v in enumerate(weights):
                if not 0 <= v <= 1:
                    raise ScenarioError(f"{w}.weights[{i}]: must lie in [0, 1], got {v!r}")
            return Tabular(tuple(weights))
        gm = params.get("gap_map")
        gw = f"{w}.gap_map"
        if not isinstance(gm, dict):
            raise ScenarioError(f"{gw}: expected an object")
        if gm.get("kind") == "linear":
            gap_map = LinearGapMap(_number(gm, "intercept", gw), _number(gm, "slope", gw))
        elif gm.get("kind") == "table":
            gap_map = TableGapMap(tuple(_numbers(gm, "gaps", gw)), tuple(_numbers(gm, "weights", gw)))
        else:
            raise ScenarioError(f"{gw}.kind: expected 'linear' or 'table', got {gm.get('kind')!r}")
        return TwoStage(_number(params, "epsilon", w, 0), gap_map)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{w}: {exc}") from exc


def _read_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def scenario_from_dict(obj) -> Scenario:
    if not isinstance(obj, dict):
        raise ScenarioError("scenario: expected a JSON object")
    if obj.get("version") != SCHEMA_VERSION:
        raise ScenarioError(f"version: expected {SCHEMA_VERSION}, got {obj.get('version')!r}")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise ScenarioError("name: expected a non-empty string")
    raw = obj.get("regimes")
    if not isinstance(raw, list) or not raw:
        raise ScenarioError("regimes: expected a non-empty list")
    regimes = []
    for i, r in enumerate(raw):
        where = f"regimes[{i}]"
        if not isinstance(r, dict):
            raise ScenarioError(f"{where}: expected an object")
        p = _number(r, "p", where)
        if p <= 0 or p > 1:
            raise ScenarioError(f"{where}.p: must lie in (0, 1], got {p!r}")
        regimes.append(Regime(p, _number(r, "human_loss", where, 0), _number(r, "algo_loss", where, 0)))
    total = math.fsum(r.p for r in regimes)
    if abs(total - 1.0) > SUM_TOL:
        raise ScenarioError(f"regimes: probabilities sum to {total:.10g}, not 1")
    # sums the core model accepts as they are stay untouched, so files round-trip
    if abs(total - 1.0) > PROB_TOL:
        log.warning("renormalized regime probabilities of %s (sum was %.17g)", name, total)
        regimes = [Regime(r.p / total, r.human_loss, r.algo_loss) for r in regimes]
    rule = rule_from_dict(obj.get("combiner"))
    if isinstance(rule, Tabular) and len(rule.s) != len(regimes):
        raise ScenarioError(f"combiner.params.weights: {len(rule.s)} weights for "
                            f"{len(regimes)} regimes")
    analyses = obj.get("analyses", list(ANALYSES))
    if not isinstance(analyses, list) or any(a not in ANALYSES for a in analyses):
        raise ScenarioError(f"analyses: expected a list drawn from {', '.join(ANALYSES)}")
    return Scenario(name, tuple(regimes), rule, tuple(analyses))


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    return {
        "version": SCHEMA_VERSION,
        "name": scenario.name,
        "regimes": [{"p": r.p, "human_loss": r.human_loss, "algo_loss": r.algo_loss}
                    for r in scenario.regimes],
        "combiner": rule_to_dict(scenario.combiner),
        "analyses": list(scenario.analyses),
    }


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file.  Builtin names (``table3``) resolve
    to the packaged scenarios."""
    if str(path) in BUILTIN and not Path(path).exists():
        path = builtin_path(str(path))
    return scenario_from_dict(_read_json(path))


def write_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


def builtin_path(name: str):
    return resources.files("complementarity") / "data" / "scenarios" / f"{name}.json"


def load_sweep_config(path):
    """Read a sweep config; returns a list of ``(label, SweepGrid)``.

    Schema: ``{"version": 1, "H": .., "A": .., "p": ..,
    "delta_a": {"min": .., "max": .., "steps": ..}, "delta_h": {...},
    "combiners": [{"label": .., "type": .., "params": {..}}, ...]}``
    """
    from .optimize import SweepGrid

    obj = _read_json(path)
    if not isinstance(obj, dict) or obj.get("version") != SCHEMA_VERSION:
        raise ScenarioError(f"version: expected {SCHEMA_VERSION}")
    H, A, p = (_number(obj, k, "sweep") for k in ("H", "A", "p"))
    axes = []
    for key in ("delta_a", "delta_h"):
        ax = obj.get(key)
        if not isinstance(ax, dict):
            raise ScenarioError(f"{key}: expected an object with min, max, steps")
        steps = ax.get("steps")
        if not isinstance(steps, int) or steps < 2:
            raise ScenarioError(f"{key}.steps: expected an integer >= 2")
        axes.append((_number(ax, "min", key), _number(ax, "max", key), steps))
    combiners = obj.get("combiners")
    if not isinstance(combiners, list) or not combiners:
        raise ScenarioError("combiners: expected a non-empty list")
    grids = []
    for i, c in enumerate(combiners):
        rule = rule_from_dict(c, f"combiners[{i}]")
        label = c.get("label", rule.tag)
        try:
            grids.append((label, SweepGrid(axes[0], axes[1], H, A, p, rule)))
        except ValueError as exc:
            raise ScenarioError(f"combiners[{i}]: {exc}") from exc
    return grids
