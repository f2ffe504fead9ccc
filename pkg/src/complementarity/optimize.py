"""Choosing per-regime weights, and sweeping two-regime loss variability."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .analysis import COMPLEMENTARITY_TOL
from .errors import InfeasibleConstraints, UnsupportedRuleError
from .model import System, combine
from .rules import Tabular, WeightingRule

ACTIVE_TOL = 1e-9
MAX_REGIMES = 64


@dataclass(frozen=True)
class WeightConstraintSet:
    """Constraints on tabular weights.

    ``box`` holds one ``(lower, upper)`` pair per regime (``None`` means
    [0, 1] everywhere).  ``max_combined_disparity`` bounds the spread of the
    combined losses.  ``require_benefit`` asks every regime's combined loss
    to be strictly below the named baseline, encoded as
    ``c_i <= baseline_i - margin``.
    """

    box: Optional[tuple[tuple[float, float], ...]] = None
    max_combined_disparity: Optional[float] = None
    require_benefit: Optional[str] = None
    margin: float = 1e-9

    def __post_init__(self):
        if self.box is not None:
            box = tuple((float(lo), float(hi)) for lo, hi in self.box)
            for lo, hi in box:
                if not 0.0 <= lo <= hi <= 1.0:
                    raise ValueError(f"box bounds must satisfy 0 <= lower <= upper <= 1, got ({lo}, {hi})")
            object.__setattr__(self, "box", box)
        if self.max_combined_disparity is not None and self.max_combined_disparity < 0:
            raise ValueError("max_combined_disparity must be non-negative")
        if self.require_benefit not in (None, "human", "algorithm"):
            raise ValueError("require_benefit must be 'human', 'algorithm' or None")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")

    def bounds(self, n: int) -> np.ndarray:
        if self.box is None:
            return np.tile([0.0, 1.0], (n, 1))
        if len(self.box) != n:
            raise ValueError(f"box has {len(self.box)} entries for {n} regimes")
        return np.array(self.box, float)


@dataclass
class OptimizationResult:
    weights: np.ndarray
    average: float
    active: list[str] = field(default_factory=list)
    strict: bool = True
    margin: float = 0.0
    notes: list[str] = field(default_factory=list)


def _benefit_caps(system: System, constraints: WeightConstraintSet, margin: float):
    if constraints.require_benefit is None:
        return None
    base = system.h if constraints.require_benefit == "human" else system.a
    return base - margin


def _diagnose(system: System, constraints: WeightConstraintSet, margin: float):
    """Name a pair of jointly infeasible constraints, or return None.

    Each combined loss ranges over an interval as its weight moves through
    the box, so infeasibility always shows up either within one regime or
    between two regimes' intervals.
    """
    a, g = system.a, system.h - system.a
    box = constraints.bounds(system.n)
    ends = np.stack([a + box[:, 0] * g, a + box[:, 1] * g], axis=1)
    lo, hi = ends.min(axis=1), ends.max(axis=1)
    caps = _benefit_caps(system, constraints, margin)
    if caps is not None:
        for i in np.flatnonzero(lo > caps):
            return (f"box[{i + 1}]", f"benefit[{i + 1}]")
        hi = np.minimum(hi, caps)
    eps = constraints.max_combined_disparity
    if eps is not None:
        for i in range(system.n):
            for j in range(system.n):
                if i != j and lo[i] - hi[j] > eps:
                    return (f"disparity[{min(i, j) + 1},{max(i, j) + 1}]",
                            f"box[{i + 1}]" if caps is None else f"benefit[{j + 1}]")
    return None


def _solve(system: System, constraints: WeightConstraintSet, margin: float):
    n = system.n
    a, g, p = system.a, system.h - system.a, system.p
    rows, rhs, names = [], [], []
    eps = constraints.max_combined_disparity
    if eps is not None:
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                row = np.zeros(n)
                row[i], row[j] = g[i], -g[j]
                rows.append(row)
                rhs.append(eps - a[i] + a[j])
                names.append(f"disparity[{min(i, j) + 1},{max(i, j) + 1}]")
    caps = _benefit_caps(system, constraints, margin)
    if caps is not None:
        for i in range(n):
            row = np.zeros(n)
            row[i] = g[i]
            rows.append(row)
            rhs.append(caps[i] - a[i])
            names.append(f"benefit[{i + 1}]")
    box = constraints.bounds(n)
    res = linprog(p * g, A_ub=np.array(rows) if rows else None,
                  b_ub=np.array(rhs) if rows else None,
                  bounds=[tuple(b) for b in box], method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status == 2:
        return None
    if res.status != 0:
        raise RuntimeError(f"linear program failed: {res.message}")
    s = np.clip(res.x, box[:, 0], box[:, 1])
    active = []
    for k in range(n):
        if s[k] - box[k, 0] <= ACTIVE_TOL:
            active.append(f"box[{k + 1}] lower")
        if box[k, 1] - s[k] <= ACTIVE_TOL:
            active.append(f"box[{k + 1}] upper")
    if rows:
        slack = np.array(rhs) - np.array(rows) @ s
        active.extend(sorted({nm for nm, sl in zip(names, slack) if sl <= ACTIVE_TOL}))
    return s, active


def optimal_tabular_weights(system: System, constraints: WeightConstraintSet = WeightConstraintSet()
                            ) -> OptimizationResult:
    """Per-regime weights minimizing the combined average under ``constraints``.

    The combined average is affine in each weight, so this is a linear
    program.  If strict benefit is impossible but weak benefit (equality)
    is attainable, the weak solution is returned with ``strict=False`` and
    the regimes sitting on the boundary noted.
    """
    if system.n > MAX_REGIMES:
        raise ValueError(f"at most {MAX_REGIMES} regimes are supported")
    margin = constraints.margin if constraints.require_benefit else 0.0
    solved = _solve(system, constraints, margin)
    strict = True
    notes = []
    if solved is None and margin > 0:
        solved = _solve(system, constraints, 0.0)
        if solved is not None:
            strict = False
    if solved is None:
        pair = _diagnose(system, constraints, 0.0) or ("all constraints", "")
        raise InfeasibleConstraints(
            f"constraints are infeasible: {pair[0]} conflicts with {pair[1]}", pair)
    s, active = solved
    combined = combine(system, Tabular(tuple(s)))
    if constraints.require_benefit:
        # the solver's feasibility tolerance can swallow a tiny margin
        base = system.h if constraints.require_benefit == "human" else system.a
        strict = strict and bool(np.all(combined.losses < base))
    if not strict:
        for i in np.flatnonzero(combined.losses >= base):
            notes.append(f"benefit[{i + 1}] at strictness boundary: combined loss equals "
                         f"the {constraints.require_benefit} loss {base[i]:.6g}")
            active.append(f"benefit[{i + 1}] boundary")
    return OptimizationResult(s, combined.average, active, strict, margin, notes)


def min_variability_threshold(H: float, A: float, p: float, s1: float, s2: float) -> float:
    """Smallest ``|delta_a - delta_h|`` above which two regimes with these
    realized weights are complementary (given reliance in the right direction)."""
    if A > H:
        raise ValueError("expects A <= H; exchange roles first")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    if s1 == s2:
        raise ValueError("s1 = s2 is a constant weight: no threshold exists")
    return (H - A) * (s1 + (1 - p) / p * s2) / abs(s2 - s1)


@dataclass(frozen=True)
class SweepGrid:
    """Two-regime systems parameterized by regime 1's deviations.

    Regime 1 (probability ``p``) has ``a1 = A + delta_a`` and
    ``h1 = H + delta_h``; regime 2 takes ``A - p/(1-p) delta_a`` and
    ``H - p/(1-p) delta_h`` so the averages stay ``A`` and ``H``.
    """

    delta_a: tuple[float, float, int]
    delta_h: tuple[float, float, int]
    H: float
    A: float
    p: float
    rule: WeightingRule

    def __post_init__(self):
        for name, axis in (("delta_a", self.delta_a), ("delta_h", self.delta_h)):
            if len(axis) != 3 or int(axis[2]) < 2 or not axis[0] < axis[1]:
                raise ValueError(f"{name} must be (min, max, steps) with min < max, steps >= 2")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie strictly between 0 and 1")
        if isinstance(self.rule, Tabular):
            raise UnsupportedRuleError("sweeps need a rule that is a function of the losses")

    def axes(self):
        da = np.linspace(self.delta_a[0], self.delta_a[1], int(self.delta_a[2]))
        dh = np.linspace(self.delta_h[0], self.delta_h[1], int(self.delta_h[2]))
        return da, dh


@dataclass
class SweepResult:
    """Row-major cell results: row index follows ``delta_a``, column ``delta_h``."""

    grid: SweepGrid
    delta_a: np.ndarray
    delta_h: np.ndarray
    masked: np.ndarray
    combined: np.ndarray
    complementary: np.ndarray
    s1: np.ndarray
    s2: np.ndarray

    def cell_system(self, i: int, j: int) -> System:
        g = self.grid
        r = g.p / (1 - g.p)
        da, dh = self.delta_a[i], self.delta_h[j]
        return System.build([g.p, 1 - g.p], [g.H + dh, g.H - r * dh], [g.A + da, g.A - r * da])


def complementarity_sweep(grid: SweepGrid) -> SweepResult:
    """Combined average and complementarity flag over the ``(delta_a, delta_h)`` grid.

    Cells where any loss would be negative are masked (NaN combined loss,
    flag False).
    """
    da, dh = grid.axes()
    DA, DH = np.meshgrid(da, dh, indexing="ij")
    r = grid.p / (1 - grid.p)
    a1, a2 = grid.A + DA, grid.A - r * DA
    h1, h2 = grid.H + DH, grid.H - r * DH
    masked = (a1 < 0) | (a2 < 0) | (h1 < 0) | (h2 < 0)
    if masked.all():
        raise ValueError("every cell of the sweep has a negative loss")
    s1 = grid.rule.weights(a1, h1)
    s2 = grid.rule.weights(a2, h2)
    c = grid.p * ((1 - s1) * a1 + s1 * h1) + (1 - grid.p) * ((1 - s2) * a2 + s2 * h2)
    comp = (min(grid.A, grid.H) - c > COMPLEMENTARITY_TOL) & ~masked
    c = np.where(masked, np.nan, c)
    return SweepResult(grid, da, dh, masked, c, comp,
                       np.where(masked, np.nan, s1), np.where(masked, np.nan, s2))
