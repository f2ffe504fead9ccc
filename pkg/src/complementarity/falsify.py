"""Randomized counterexample search for the package's guarantees.

Each condition id pairs a generator biased toward the guarantee's hypothesis
with a check of its conclusion.  Trials are processed in fixed-size chunks;
chunk ``k`` draws from ``default_rng([seed, k])`` so results do not depend
on how many worker processes share the chunks.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .analysis import (covariance_condition, exemplar_condition, impossibility_screen,
                       is_complementary, n2_condition)
from .fairness import benefit_exclusion_check, disparity_containment, disparity_lower_bound
from .model import System, combine
from .rules import (Constant, Exemplar, LinearGapMap, Min, ProbTrust, TableGapMap,
                    Tabular, TwoStage, WeightingRule)

CHUNK = 2000


@dataclass(frozen=True)
class GeneratorBounds:
    max_regimes: int = 8
    max_loss: float = 2.0


@dataclass
class Counterexample:
    condition_id: str
    system: System
    rule: WeightingRule
    message: str

    def __str__(self):
        return f"{self.condition_id}: {self.message}\n  {self.system!r}\n  rule={self.rule!r}"


@dataclass
class FalsificationResult:
    condition_id: str
    trials: int
    exercised: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples


def random_probs(rng, n: int) -> np.ndarray:
    # mix toward uniform so no regime is vanishingly rare
    p = 0.9 * rng.dirichlet(np.ones(n)) + 0.1 / n
    return p / p.sum()


def random_losses(rng, n: int, bounds: GeneratorBounds) -> np.ndarray:
    x = rng.uniform(0.0, bounds.max_loss, n)
    if rng.random() < 0.3:
        x = np.round(x / 0.05) * 0.05  # coarse values create exact ties
    return x


def random_system(rng, bounds: GeneratorBounds, n: Optional[int] = None) -> System:
    n = n or int(rng.integers(1, bounds.max_regimes + 1))
    return System.build(random_probs(rng, n), random_losses(rng, n, bounds),
                        random_losses(rng, n, bounds))


def random_rule(rng, n: int, kinds=("min", "prob_trust", "two_stage", "exemplar",
                                    "constant", "tabular")) -> WeightingRule:
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "min":
        return Min()
    if kind == "prob_trust":
        return ProbTrust(float(rng.uniform()))
    if kind == "two_stage":
        if rng.random() < 0.5:
            gap_map = LinearGapMap(float(rng.uniform(0, 1)), float(rng.uniform(0, 3)))
        else:
            gaps = np.sort(rng.uniform(0, 2, 3))
            gap_map = TableGapMap(tuple(gaps), tuple(np.sort(rng.uniform(0, 1, 3))[::-1]))
        return TwoStage(float(rng.uniform(0, 0.5)), gap_map)
    if kind == "exemplar":
        return Exemplar(float(rng.uniform(-0.5, 1.5)), float(rng.uniform(-2, 4)))
    if kind == "constant":
        return Constant(float(rng.uniform()))
    return Tabular(tuple(rng.uniform(0, 1, n)))


# Each trial returns (hypothesis_met, failure message or None, system, rule).

def _trial_constant_losses(rng, bounds):
    n = int(rng.integers(1, bounds.max_regimes + 1))
    system = System.build(random_probs(rng, n), np.full(n, rng.uniform(0, bounds.max_loss)),
                          np.full(n, rng.uniform(0, bounds.max_loss)))
    rule = random_rule(rng, n)
    return _screen_check(system, rule, "constant-losses")


def _trial_dominance(rng, bounds):
    n = int(rng.integers(1, bounds.max_regimes + 1))
    base = random_losses(rng, n, bounds)
    bump = rng.uniform(0, 0.5, n) * (rng.random(n) < 0.8)
    worse = base + bump
    a, h = (base, worse) if rng.random() < 0.5 else (worse, base)
    system = System.build(random_probs(rng, n), h, a)
    rule = random_rule(rng, n)
    tag = "dominance-algorithm" if np.all(a <= h) else "dominance-human"
    return _screen_check(system, rule, tag)


def _trial_constant_weight(rng, bounds):
    system = random_system(rng, bounds)
    if rng.random() < 0.5:
        rule = Constant(float(rng.uniform()))
    else:
        rule = Tabular((float(rng.uniform()),) * system.n)
    return _screen_check(system, rule, "constant-weight")


def _screen_check(system, rule, tag, grid_size=0):
    screen = impossibility_screen(system, rule, grid_size=grid_size)
    if tag not in screen.triggered:
        return False, None, system, rule
    comp = is_complementary(system, rule)
    if comp.satisfied:
        return (True, f"{tag} triggered yet complementary (gap {comp.details['gap']:.3g})",
                system, rule)
    return True, None, system, rule


def _trial_convex(rng, bounds):
    system = random_system(rng, bounds)
    rule = random_rule(rng, system.n, kinds=("constant", "exemplar", "two_stage", "prob_trust"))
    return _screen_check(system, rule, "convex-grid", grid_size=41)


def _trial_n2(rng, bounds):
    system = (_variability_system(rng, bounds) if rng.random() < 0.5 else None) \
        or random_system(rng, bounds, n=2)
    rule = random_rule(rng, 2)
    combined = combine(system, rule)
    report = n2_condition(system, rule, combined)
    if not report.satisfied:
        return False, None, system, rule
    if not is_complementary(system, rule, combined).satisfied:
        return True, f"threshold met ({report.lhs:.4g} < {report.rhs:.4g}) but not complementary", system, rule
    return True, None, system, rule


def _trial_covariance(rng, bounds):
    system = random_system(rng, bounds)
    rule = random_rule(rng, system.n)
    combined = combine(system, rule)
    report = covariance_condition(system, rule, combined)
    if report.details["form_difference"] > 1e-9:
        return True, f"sum and covariance forms differ by {report.details['form_difference']:.3g}", system, rule
    comp = is_complementary(system, rule, combined)
    if report.satisfied and not comp.satisfied:
        return True, "covariance condition met but not complementary", system, rule
    return report.satisfied, None, system, rule


def _variability_system(rng, bounds):
    """Two regimes built from averages plus regime-1 deviations; None if a
    loss would be negative."""
    p = float(rng.uniform(0.1, 0.9))
    A = float(rng.uniform(0, bounds.max_loss / 2))
    H = A + float(rng.uniform(0, 0.5))
    if rng.random() < 0.5:
        A, H = H, A
    da, dh = rng.uniform(-1, 1, 2)
    r = p / (1 - p)
    a, h = [A + da, A - r * da], [H + dh, H - r * dh]
    if min(a + h) < 0:
        return None
    return System.build([p, 1 - p], h, a)


def _trial_exemplar(rng, bounds):
    system = (_variability_system(rng, bounds) if rng.random() < 0.7 else None) \
        or random_system(rng, bounds, n=2)
    b, m = float(rng.uniform(-0.5, 1.5)), float(rng.uniform(0.05, 4))
    if rng.random() < 0.6:
        # pick b so both unclamped weights land in [0, 1) in the oriented frame
        swapped = system.human_average < system.algorithm_average
        gaps = (system.a - system.h) if swapped else (system.h - system.a)
        lo, hi = m * float(gaps.max()), 1.0 + m * float(gaps.min())
        if lo < hi:
            b_o = float(rng.uniform(lo, hi))
            b = 1.0 - b_o if swapped else b_o
    rule = Exemplar(b, m)
    report = exemplar_condition(system, b, m)
    if not report.satisfied:
        return False, None, system, rule
    if not is_complementary(system, rule).satisfied:
        return True, f"exemplar threshold met ({report.lhs:.4g} < {report.rhs:.4g}) but not complementary", system, rule
    return True, None, system, rule


def _trial_benefit(rng, bounds):
    system = random_system(rng, bounds)
    if rng.random() < 0.5:
        # push toward universal benefit: one side worse everywhere
        lo = np.minimum(system.a, system.h)
        hi = np.maximum(system.a, system.h) + 1e-3
        system = System.build(system.p, hi, lo) if rng.random() < 0.5 else System.build(system.p, lo, hi)
    rule = random_rule(rng, system.n)
    combined = combine(system, rule)
    met = False
    for baseline in ("human", "algorithm"):
        report = benefit_exclusion_check(system, rule, baseline, combined)
        met = met or bool(report.lhs)
        if not report.satisfied:
            return True, f"every regime benefits vs {baseline} and the system is complementary", system, rule
    return met, None, system, rule


def _trial_lower_bound(rng, bounds):
    system = random_system(rng, bounds)
    rule = random_rule(rng, system.n, kinds=("min", "min", "prob_trust", "exemplar", "tabular"))
    combined = combine(system, rule)
    report = disparity_lower_bound(system, rule, combined)
    if not report.details["complementary"]:
        return False, None, system, rule
    if not report.satisfied:
        return True, f"complementary but {report.lhs:.4g} >= {report.rhs:.4g}", system, rule
    return True, None, system, rule


def _trial_containment(rng, bounds):
    system = random_system(rng, bounds)
    rule = random_rule(rng, system.n)
    report = disparity_containment(system, rule)
    if not report.details["precondition"]:
        return False, None, system, rule
    if not report.satisfied:
        return True, f"precondition holds but eps_c {report.lhs:.4g} > {report.rhs:.4g}", system, rule
    return True, None, system, rule


CONDITIONS: dict[str, Callable] = {
    "constant-losses": _trial_constant_losses,
    "dominance": _trial_dominance,
    "constant-weight": _trial_constant_weight,
    "convex-grid": _trial_convex,
    "n2-threshold": _trial_n2,
    "covariance": _trial_covariance,
    "exemplar": _trial_exemplar,
    "benefit-exclusion": _trial_benefit,
    "disparity-lower-bound": _trial_lower_bound,
    "disparity-containment": _trial_containment,
}


def _run_chunk(args):
    condition_id, seed, index, count, bounds = args
    trial = CONDITIONS[condition_id]
    rng = np.random.default_rng([seed, index])
    exercised = 0
    found = []
    for _ in range(count):
        met, failure, system, rule = trial(rng, bounds)
        exercised += bool(met)
        if failure is not None:
            found.append(Counterexample(condition_id, system, rule, failure))
    return exercised, found


def falsification_sweep(condition_id: str, trials: int, seed: int = 0,
                        bounds: GeneratorBounds = GeneratorBounds(),
                        workers: int = 1) -> FalsificationResult:
    """Search ``trials`` random instances for a violation of ``condition_id``.

    ``exercised`` counts trials where the guarantee's hypothesis held, so a
    pass is not vacuous.
    """
    if condition_id not in CONDITIONS:
        raise ValueError(f"unknown condition {condition_id!r}; choose from {sorted(CONDITIONS)}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    jobs = []
    for k, start in enumerate(range(0, trials, CHUNK)):
        jobs.append((condition_id, seed, k, min(CHUNK, trials - start), bounds))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_chunk, jobs))
    else:
        outcomes = [_run_chunk(job) for job in jobs]
    result = FalsificationResult(condition_id, trials)
    for exercised, found in outcomes:
        result.exercised += exercised
        result.counterexamples.extend(found)
    return result
