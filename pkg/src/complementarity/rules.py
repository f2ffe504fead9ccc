"""Weighting rules: how much weight a combined decision puts on the human.

Every rule maps a regime's pair of losses ``(a, h)`` (algorithm, human) to a
weight ``s`` in [0, 1]; the combined loss is ``(1 - s) * a + s * h``.  Apart
from :class:`Tabular`, which stores one weight per regime, each rule is a
function of the two losses alone and in fact of the gap ``h - a`` only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Optional, Union

import numpy as np

from .errors import StructuralError, UnsupportedRuleError


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class LinearGapMap:
    """``clamp(intercept - slope * gap, 0, 1)``; non-increasing iff slope >= 0."""

    intercept: float
    slope: float

    def __call__(self, gap):
        return np.clip(self.intercept - self.slope * np.asarray(gap, float), 0.0, 1.0)

    def is_monotone(self) -> bool:
        return self.slope >= 0


@dataclass(frozen=True)
class TableGapMap:
    """Piecewise-linear interpolation through ``(gaps[k], weights[k])``.

    Outside the tabulated range the end weights are held constant.
    """

    gaps: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gaps", tuple(float(g) for g in self.gaps))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.gaps) != len(self.weights) or not self.gaps:
            raise StructuralError("gap table needs equally many gaps and weights (at least one)")
        if any(g1 >= g2 for g1, g2 in zip(self.gaps, self.gaps[1:])):
            raise ValueError("gap table abscissae must be strictly increasing")
        for w in self.weights:
            _check_unit("gap table weight", w)

    def __call__(self, gap):
        return np.interp(np.asarray(gap, float), self.gaps, self.weights)

    def is_monotone(self) -> bool:
        return all(w1 >= w2 for w1, w2 in zip(self.weights, self.weights[1:]))


GapMap = Union[LinearGapMap, TableGapMap]


class WeightingRule:
    """Base class; subclasses implement :meth:`weights`."""

    tag: ClassVar[str]

    def weights(self, a, h) -> np.ndarray:
        """Vectorized weights for elementwise loss pairs."""
        raise NotImplementedError

    def weight(self, a: float, h: float, regime_index: Optional[int] = None) -> float:
        return float(self.weights(np.array([a], float), np.array([h], float))[0])


@dataclass(frozen=True)
class Min(WeightingRule):
    """All weight on whichever predictor has the lower loss (human on ties)."""

    tag: ClassVar[str] = "min"

    def weights(self, a, h):
        return np.where(np.asarray(h) <= np.asarray(a), 1.0, 0.0)


@dataclass(frozen=True)
class ProbTrust(WeightingRule):
    """Trust the better predictor with probability ``p_s``.

    As a deterministic weight this is the mixture ``p_s`` when the human is
    at least as good, ``1 - p_s`` otherwise.
    """

    p_s: float
    tag: ClassVar[str] = "prob_trust"

    def __post_init__(self):
        _check_unit("p_s", self.p_s)

    def weights(self, a, h):
        return np.where(np.asarray(h) <= np.asarray(a), self.p_s, 1.0 - self.p_s)


@dataclass(frozen=True)
class TwoStage(WeightingRule):
    """Ignore the algorithm unless it beats the human by more than ``epsilon``;
    past that threshold the human weight is ``gap_map(h - a)``."""

    epsilon: float
    gap_map: GapMap
    tag: ClassVar[str] = "two_stage"

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon!r}")

    def weights(self, a, h):
        a = np.asarray(a, float)
        h = np.asarray(h, float)
        return np.where(a >= h - self.epsilon, 1.0, self.gap_map(h - a))


@dataclass(frozen=True)
class Exemplar(WeightingRule):
    """Clamped affine weight ``clamp(b - m * (h - a), 0, 1)``.

    With ``m > 0`` the human is trusted less as their loss grows relative to
    the algorithm's; ``m < 0`` reverses that.
    """

    b: float
    m: float
    tag: ClassVar[str] = "exemplar"

    def weights(self, a, h):
        gap = np.asarray(h, float) - np.asarray(a, float)
        return np.clip(self.b - self.m * gap, 0.0, 1.0)


@dataclass(frozen=True)
class Constant(WeightingRule):
    s: float
    tag: ClassVar[str] = "constant"

    def __post_init__(self):
        _check_unit("s", self.s)

    def weights(self, a, h):
        return np.full(np.shape(a), float(self.s))


@dataclass(frozen=True)
class Tabular(WeightingRule):
    """An explicit weight per regime; not a function of the losses."""

    s: tuple[float, ...]
    tag: ClassVar[str] = "tabular"

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(float(v) for v in self.s))
        if not self.s:
            raise StructuralError("tabular rule needs at least one weight")
        for v in self.s:
            _check_unit("tabular weight", v)

    def weights(self, a, h):
        n = np.shape(a)[0] if np.ndim(a) else 1
        if n != len(self.s):
            raise StructuralError(
                f"tabular rule has {len(self.s)} weights but the system has {n} regimes")
        return np.array(self.s, float)

    def weight(self, a, h, regime_index=None):
        if regime_index is None:
            raise ValueError("a tabular rule needs regime_index")
        return self.s[regime_index]


RULE_TYPES: dict[str, type] = {
    cls.tag: cls for cls in (Min, ProbTrust, TwoStage, Exemplar, Constant, Tabular)
}


def weight(rule: WeightingRule, a: float, h: float, regime_index: Optional[int] = None) -> float:
    """Weight on the human for one regime with losses ``a`` and ``h``."""
    if a < 0 or h < 0:
        raise ValueError("losses must be non-negative")
    return rule.weight(a, h, regime_index)


def curve(rule: WeightingRule, gap_min: float, gap_max: float, steps: int):
    """Sample the weight as a function of the gap ``h - a``.

    Returns ``steps`` evenly spaced ``(gap, weight)`` pairs.  Each gap is
    evaluated at ``(a, h) = (0, gap)``, or ``(-gap, 0)`` for negative gaps,
    which keeps both losses non-negative.
    """
    if isinstance(rule, Tabular):
        raise UnsupportedRuleError("a tabular rule has no weight-versus-gap curve")
    if not gap_min < gap_max:
        raise ValueError("gap_min must be below gap_max")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    gaps = np.linspace(gap_min, gap_max, steps)
    a = np.where(gaps < 0, -gaps, 0.0)
    h = np.where(gaps < 0, 0.0, gaps)
    w = rule.weights(a, h)
    return [(float(g), float(v)) for g, v in zip(gaps, w)]
