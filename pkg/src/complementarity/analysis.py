"""Complementarity verdicts, impossibility screens and sufficient conditions.

A system is complementary when its combined average loss is strictly below
both the human's and the algorithm's.  The sufficient conditions here are
stated for the orientation where the algorithm has the lower average; when
the human does, roles are exchanged (weights become ``1 - s``) and the
exchange is noted in the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import System, combine
from .reports import CONDITION_MARGIN, ConditionReport
from .rules import Constant, Exemplar, Tabular, WeightingRule

# Margin below min(A, H) a combined average must reach to count as strictly
# lower; absorbs rounding in the probability-weighted sums.
COMPLEMENTARITY_TOL = 1e-12
CONSTANT_TOL = 1e-9

SCREEN_TAGS = ("constant-losses", "dominance-algorithm", "dominance-human",
               "constant-weight", "convex-grid")
EXACT_SCREEN_TAGS = SCREEN_TAGS[:4]


def is_complementary(system: System, rule: WeightingRule, combined=None) -> ConditionReport:
    """Is the combined average strictly below ``min(A, H)``?

    ``lhs`` is the combined average, ``rhs`` the better unaided average and
    ``details["gap"]`` their difference ``rhs - lhs``.
    """
    combined = combined if combined is not None else combine(system, rule)
    A, H = system.algorithm_average, system.human_average
    best = min(A, H)
    gap = best - combined.average
    report = ConditionReport(
        "complementarity", combined.average, best, gap > COMPLEMENTARITY_TOL,
        details={"gap": gap, "human_average": H, "algorithm_average": A})
    return report


@dataclass
class Oriented:
    """A two-role view of a system in which the "algorithm" role has the
    lower (or equal) average loss."""

    p: np.ndarray
    a: np.ndarray
    h: np.ndarray
    s: np.ndarray
    A: float
    H: float
    swapped: bool

    @property
    def delta_a(self) -> np.ndarray:
        return self.a - self.A

    @property
    def delta_h(self) -> np.ndarray:
        return self.h - self.H

    def note(self) -> list[str]:
        if self.swapped:
            return ["human has the lower average: roles exchanged, weights read as 1 - s"]
        return []


def orient(system: System, weights) -> Oriented:
    A, H = system.algorithm_average, system.human_average
    s = np.asarray(weights, float)
    if H < A:
        return Oriented(system.p, system.h, system.a, 1.0 - s, H, A, True)
    return Oriented(system.p, system.a, system.h, s, A, H, False)


@dataclass
class ImpossibilityScreen:
    triggered: frozenset = frozenset()
    notes: list[str] = field(default_factory=list)

    @property
    def exact(self) -> frozenset:
        """Triggered tags that by themselves rule out complementarity."""
        return self.triggered & frozenset(EXACT_SCREEN_TAGS)


def _is_constant(values) -> bool:
    return float(np.max(values) - np.min(values)) <= CONSTANT_TOL


def impossibility_screen(system: System, rule: WeightingRule, grid_size: int = 101,
                         grid_tol: float = 1e-9) -> ImpossibilityScreen:
    """Check the hypotheses under which complementarity cannot occur.

    ``constant-losses``, both ``dominance-*`` tags and ``constant-weight`` are
    exact.  ``convex-grid`` is a heuristic: it only says that a midpoint
    convexity sweep of the combined-loss map over a ``grid_size`` square grid
    found no violation.  Pass ``grid_size=0`` to skip it.
    """
    a, h = system.a, system.h
    tags = set()
    notes = []
    if _is_constant(a) and _is_constant(h):
        tags.add("constant-losses")
    if np.all(a <= h):
        tags.add("dominance-algorithm")
    if np.all(a >= h):
        tags.add("dominance-human")
    s = np.asarray(rule.weights(a, h), float)
    if isinstance(rule, Constant) or _is_constant(s):
        tags.add("constant-weight")
    if grid_size:
        if isinstance(rule, Tabular):
            notes.append("convex-grid skipped: a tabular rule is not a function of the losses")
        else:
            violation = midpoint_convexity_violation(rule, system, grid_size, grid_tol)
            if violation is None:
                tags.add("convex-grid")
                notes.append(f"convex-grid: no midpoint convexity violation on a "
                             f"{grid_size}x{grid_size} grid (heuristic, not a proof)")
            else:
                notes.append(f"convex-grid: combined loss not convex near (a, h) = "
                             f"({violation[0]:.4g}, {violation[1]:.4g})")
    return ImpossibilityScreen(frozenset(tags), notes)


_DIRECTIONS = ((1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2))


def midpoint_convexity_violation(rule: WeightingRule, system: System, grid_size: int = 101,
                                 tol: float = 1e-9):
    """Search for ``C(mid) > (C(x) + C(y)) / 2`` on a grid spanning the
    system's loss range; return the offending midpoint or ``None``."""
    losses = np.concatenate([system.a, system.h])
    lo, hi = float(losses.min()), float(losses.max())
    axis = np.linspace(lo, hi, grid_size)
    A, Hh = np.meshgrid(axis, axis, indexing="ij")
    s = rule.weights(A, Hh)
    C = (1.0 - s) * A + s * Hh
    n = grid_size
    step = 1
    while step < n:
        for di, dj in _DIRECTIONS:
            ki, kj = di * step, dj * step
            if 2 * abs(ki) >= n or 2 * abs(kj) >= n:
                continue
            ri = slice(abs(ki), n - abs(ki))
            rj = slice(abs(kj), n - abs(kj))
            centre = C[ri, rj]
            fwd = C[abs(ki) + ki:n - abs(ki) + ki, abs(kj) + kj:n - abs(kj) + kj]
            bwd = C[abs(ki) - ki:n - abs(ki) - ki, abs(kj) - kj:n - abs(kj) - kj]
            bad = centre > 0.5 * (fwd + bwd) + tol
            if bad.any():
                i, j = np.argwhere(bad)[0]
                return float(A[ri, rj][i, j]), float(Hh[ri, rj][i, j])
        step *= 2
    return None


def n2_condition(system: System, rule: WeightingRule, combined=None) -> ConditionReport:
    """Two-regime variability threshold.

    With the lower-average predictor in the algorithm role, regime 1 of
    probability ``p`` and realized weights ``s1 != s2``::

        (H - A) * (s1 + (1-p)/p * s2) / |s2 - s1|  <  |delta_a - delta_h|

    where the deltas are regime 1's deviations from each average.  The bound
    only guarantees complementarity when reliance points the right way, i.e.
    ``(delta_a - delta_h) * (s1 - s2) > 0``; a report with the bound met but
    reliance reversed is not satisfied.

    With aligned reliance the improvement over the better average is exactly
    ``p |s1 - s2| (rhs - lhs)`` (``details["implied_gap"]``); the report is
    satisfied only when that clears ``CONDITION_MARGIN``.
    """
    if system.n != 2:
        raise ValueError(f"the two-regime condition needs N = 2, got N = {system.n}")
    combined = combined if combined is not None else combine(system, rule)
    o = orient(system, combined.weights)
    p = float(o.p[0])
    s1, s2 = float(o.s[0]), float(o.s[1])
    diff = float(o.delta_a[0] - o.delta_h[0])
    rhs = abs(diff)
    notes = o.note()
    details = {"s1": s1, "s2": s2, "p": p, "swapped": o.swapped,
               "delta_a": float(o.delta_a[0]), "delta_h": float(o.delta_h[0])}
    if abs(s1 - s2) <= CONSTANT_TOL:
        notes.append("constant-weight: s1 = s2, the threshold is unbounded")
        return ConditionReport("n2-threshold", math.inf, rhs, False, notes=notes,
                               details=details | {"aligned": False})
    lhs = (o.H - o.A) * (s1 + (1 - p) / p * s2) / abs(s2 - s1)
    aligned = diff * (s1 - s2) > 0
    details["aligned"] = aligned
    if not aligned:
        notes.append("reliance reversed: the human is weighted more where it is relatively worse")
    implied = p * abs(s1 - s2) * (rhs - lhs)
    details["implied_gap"] = implied
    satisfied = aligned and lhs < rhs and implied > CONDITION_MARGIN
    return ConditionReport("n2-threshold", lhs, rhs, satisfied, notes=notes, details=details)


def covariance_condition(system: System, rule: WeightingRule, combined=None) -> ConditionReport:
    """Weight/variability covariance condition for any number of regimes.

    ``lhs = (H - A) E[s]`` and ``rhs = Cov(s, delta_a - delta_h)`` under the
    regime distribution.  ``rhs - lhs`` equals ``A - C``, so the condition is
    also necessary.  Both the plain sum ``E[s (delta_a - delta_h)]`` and the
    centred covariance are reported.
    """
    combined = combined if combined is not None else combine(system, rule)
    o = orient(system, combined.weights)
    d = o.delta_a - o.delta_h
    mean_s = float(o.p @ o.s)
    sum_form = float(o.p @ (o.s * d))
    cov_form = float(o.p @ ((o.s - mean_s) * (d - float(o.p @ d))))
    lhs = (o.H - o.A) * mean_s
    notes = o.note()
    return ConditionReport(
        "covariance", lhs, cov_form, cov_form - lhs > CONDITION_MARGIN, notes=notes,
        details={"sum_form": sum_form, "covariance_form": cov_form,
                 "form_difference": abs(sum_form - cov_form), "mean_weight": mean_s,
                 "swapped": o.swapped})


def exemplar_condition(system: System, b: float, m: float) -> ConditionReport:
    """Two-regime threshold for the exemplar rule ``clamp(b - m (h - a), 0, 1)``.

    In the orientation with ``A <= H`` (exchanging roles maps ``b`` to
    ``1 - b``) and with both unclamped weights in ``[0, 1)``, the system is
    complementary whenever::

        sqrt(H - A) * sqrt((1-p)/p * (b/m - (H - A)))  <  |delta_a - delta_h|

    Outside those preconditions ``details["precondition"]`` is False and the
    report is not satisfied.  Inside them the improvement over the better
    average is exactly ``p m / (1-p) * (rhs**2 - lhs**2)``
    (``details["implied_gap"]``), which must clear ``CONDITION_MARGIN``.
    """
    if system.n != 2:
        raise ValueError(f"the exemplar condition needs N = 2, got N = {system.n}")
    if not m > 0:
        raise ValueError(f"the exemplar condition needs m > 0, got {m!r}")
    rule = Exemplar(b, m)
    o = orient(system, rule.weights(system.a, system.h))
    b_o = 1.0 - b if o.swapped else b
    raw = b_o - m * (o.h - o.a)
    p = float(o.p[0])
    gap = o.H - o.A
    rhs = abs(float(o.delta_a[0] - o.delta_h[0]))
    radicand = (1 - p) / p * (b_o / m - gap)
    notes = o.note()
    details = {"raw_weights": raw.tolist(), "radicand": radicand, "b_oriented": b_o,
               "swapped": o.swapped}
    precondition = True
    if np.any(raw >= 1.0):
        notes.append("precondition failed: a weight reaches 1")
        precondition = False
    if np.any(raw < 0.0):
        notes.append("precondition failed: a weight is clamped at 0")
        precondition = False
    if radicand < 0:
        notes.append("precondition failed: negative radicand forces a weight below 0")
        precondition = False
    details["precondition"] = precondition
    if not precondition:
        return ConditionReport("exemplar", math.nan, rhs, False, notes=notes, details=details)
    lhs = math.sqrt(gap) * math.sqrt(radicand)
    implied = p * m / (1 - p) * (rhs * rhs - lhs * lhs)
    details["implied_gap"] = implied
    return ConditionReport("exemplar", lhs, rhs, lhs < rhs and implied > CONDITION_MARGIN,
                           notes=notes, details=details)
