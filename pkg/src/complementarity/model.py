"""Regime-level loss model of a human working with an algorithm.

The input space is split into regimes.  Regime ``i`` occurs with probability
``p[i]``; within it the unaided human has expected loss ``h[i]`` and the
algorithm ``a[i]``.  A weighting rule chooses a weight ``s[i]`` on the human
and the combined loss is the affine mixture ``(1 - s[i]) a[i] + s[i] h[i]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import BoundednessViolation, StructuralError
from .reports import ConditionReport
from .rules import WeightingRule

PROB_TOL = 1e-9
BAND_TOL = 1e-9
TIE_TOL = 1e-12


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise StructuralError(f"{name} must have at least one regime")
    if not np.all(np.isfinite(arr)):
        raise StructuralError(f"{name} must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class RegimeDistribution:
    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen(self.probs, "probs")
        if np.any(probs <= 0):
            raise StructuralError("regime probabilities must be strictly positive")
        total = math.fsum(probs)
        if abs(total - 1.0) > PROB_TOL:
            raise StructuralError(f"regime probabilities sum to {total:.12g}, not 1")
        object.__setattr__(self, "probs", probs)

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True, eq=False)
class LossProfile:
    losses: np.ndarray

    def __post_init__(self):
        losses = _frozen(self.losses, "losses")
        if np.any(losses < 0):
            raise StructuralError("losses must be non-negative")
        object.__setattr__(self, "losses", losses)

    def __len__(self):
        return self.losses.size


def _losses(profile) -> np.ndarray:
    return profile.losses if isinstance(profile, LossProfile) else np.asarray(profile, float)


def _probs(dist) -> np.ndarray:
    return dist.probs if isinstance(dist, RegimeDistribution) else np.asarray(dist, float)


@dataclass(frozen=True, eq=False)
class System:
    """Regime probabilities plus the human's and the algorithm's losses."""

    dist: RegimeDistribution
    human: LossProfile
    algorithm: LossProfile

    def __post_init__(self):
        n = len(self.dist)
        if len(self.human) != n or len(self.algorithm) != n:
            raise StructuralError(
                f"length mismatch: {n} probabilities, {len(self.human)} human losses, "
                f"{len(self.algorithm)} algorithm losses")

    @classmethod
    def build(cls, probs, human, algorithm) -> "System":
        return cls(RegimeDistribution(probs), LossProfile(human), LossProfile(algorithm))

    @property
    def n(self) -> int:
        return len(self.dist)

    @property
    def p(self) -> np.ndarray:
        return self.dist.probs

    @property
    def h(self) -> np.ndarray:
        return self.human.losses

    @property
    def a(self) -> np.ndarray:
        return self.algorithm.losses

    @property
    def human_average(self) -> float:
        return float(self.p @ self.h)

    @property
    def algorithm_average(self) -> float:
        return float(self.p @ self.a)

    def swapped(self) -> "System":
        """The same system with the human and algorithm roles exchanged."""
        return System(self.dist, self.algorithm, self.human)

    def __repr__(self):
        return (f"System(p={self.p.tolist()}, human={self.h.tolist()}, "
                f"algorithm={self.a.tolist()})")


@dataclass(frozen=True, eq=False)
class Deltas:
    """Per-regime deviations ``values`` from the profile mean ``mean_loss``."""

    values: np.ndarray
    mean_loss: float


@dataclass(frozen=True, eq=False)
class CombinedProfile:
    losses: np.ndarray
    weights: np.ndarray
    average: float
    probs: np.ndarray

    @property
    def weight_average(self) -> float:
        return float(self.probs @ self.weights)


def average_loss(profile: Union[LossProfile, Sequence[float]],
                 dist: Union[RegimeDistribution, Sequence[float]]) -> float:
    """Probability-weighted mean loss."""
    losses = _losses(profile)
    probs = _probs(dist)
    if losses.shape != probs.shape:
        raise StructuralError(
            f"length mismatch: {losses.size} losses for {probs.size} regimes")
    return float(probs @ losses)


def deltas(profile, dist) -> Deltas:
    mean = average_loss(profile, dist)
    values = _losses(profile) - mean
    values.flags.writeable = False
    return Deltas(values, mean)


def combine(system: System, rule: WeightingRule) -> CombinedProfile:
    """Per-regime combined losses and weights induced by ``rule``."""
    s = np.asarray(rule.weights(system.a, system.h), float)
    losses = (1.0 - s) * system.a + s * system.h
    return CombinedProfile(losses, s, float(system.p @ losses), system.p)


def weight_from_combiner(a: float, h: float, c: float, tol: float = BAND_TOL) -> float:
    """Recover the weight on the human that turns ``(a, h)`` into combined loss ``c``.

    Requires ``c`` inside ``[min(a, h), max(a, h)]`` up to ``tol``.  Equal
    losses give weight 1/2; any weight would do there.
    """
    lo, hi = min(a, h), max(a, h)
    if c < lo - tol or c > hi + tol:
        raise BoundednessViolation(
            f"combined loss {c!r} lies outside [{lo!r}, {hi!r}]: a combined loss must "
            "be bounded by the human and algorithm losses of its regime")
    if abs(a - h) <= TIE_TOL:
        return 0.5
    return min(1.0, max(0.0, (c - a) / (h - a)))


def profile_from_losses(system: System, combined_losses: Sequence[float]) -> CombinedProfile:
    """Wrap externally supplied combined losses, deriving the implied weights."""
    c = np.asarray(combined_losses, float)
    if c.shape != system.p.shape:
        raise StructuralError(f"{c.size} combined losses for {system.n} regimes")
    s = np.array([weight_from_combiner(ai, hi, ci) for ai, hi, ci in zip(system.a, system.h, c)])
    return CombinedProfile(c, s, float(system.p @ c), system.p)


def validate_assumptions(system: System, combined) -> ConditionReport:
    """Report boundedness breaches and loss-pair inconsistencies.

    ``combined`` is a :class:`CombinedProfile` or a plain sequence of combined
    losses.  Two regimes with identical ``(a, h)`` pairs but different
    combined losses mean the combiner looks at more than the losses.
    """
    c = np.asarray(combined.losses if isinstance(combined, CombinedProfile) else combined, float)
    if c.shape != system.p.shape:
        raise StructuralError(f"{c.size} combined losses for {system.n} regimes")
    a, h = system.a, system.h
    notes = []
    lo, hi = np.minimum(a, h), np.maximum(a, h)
    for i in np.flatnonzero((c < lo - BAND_TOL) | (c > hi + BAND_TOL)):
        notes.append(f"regime {i + 1}: combined loss {c[i]:.6g} outside "
                     f"[{lo[i]:.6g}, {hi[i]:.6g}] (boundedness)")
    for i in range(system.n):
        for j in range(i + 1, system.n):
            if (abs(a[i] - a[j]) <= TIE_TOL and abs(h[i] - h[j]) <= TIE_TOL
                    and abs(c[i] - c[j]) > BAND_TOL):
                notes.append(f"regimes {i + 1} and {j + 1}: identical loss pair "
                             f"({a[i]:.6g}, {h[i]:.6g}) but combined losses "
                             f"{c[i]:.6g} vs {c[j]:.6g} (losses-only)")
    return ConditionReport("assumptions", float(len(notes)), 0.0, not notes,
                           relation="==", notes=notes)


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    samples: int


def monte_carlo_average(system: System, rule: WeightingRule, samples: int,
                        seed: int = 0) -> MonteCarloEstimate:
    """Simulate the combined loss by sampling regimes and a Bernoulli choice.

    Each draw picks a regime from the distribution, then takes the human's
    loss with probability equal to the rule's weight and the algorithm's
    otherwise.  The expectation equals :func:`combine`'s average.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    s = np.asarray(rule.weights(system.a, system.h), float)
    regime = rng.choice(system.n, size=samples, p=system.p / system.p.sum())
    take_human = rng.random(samples) < s[regime]
    loss = np.where(take_human, system.h[regime], system.a[regime])
    # shifting by the minimum keeps degenerate systems exact
    base = float(loss.min())
    centered = loss - base
    mean = base + float(centered.mean())
    stderr = float(centered.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.nan
    return MonteCarloEstimate(mean, stderr, samples)
