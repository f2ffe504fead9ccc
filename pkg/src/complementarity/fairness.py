"""Regime-level fairness: who benefits from the combination, and how unequal
losses are across regimes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import is_complementary, orient
from .model import LossProfile, System, combine
from .reports import ConditionReport
from .rules import WeightingRule

BASELINES = ("human", "algorithm")
CONTAINMENT_TOL = 1e-12


@dataclass(frozen=True)
class BenefitReport:
    baseline: str
    strict: tuple[bool, ...]
    weak: tuple[bool, ...]

    @property
    def overall(self) -> bool:
        return all(self.strict)


def _baseline_losses(system: System, baseline: str) -> np.ndarray:
    if baseline == "human":
        return system.h
    if baseline == "algorithm":
        return system.a
    raise ValueError(f"baseline must be one of {BASELINES}, got {baseline!r}")


def fairness_of_benefit(system: System, rule: WeightingRule, baseline: str = "human",
                        combined=None) -> BenefitReport:
    """A regime benefits when its combined loss is strictly below the baseline's."""
    base = _baseline_losses(system, baseline)
    c = (combined if combined is not None else combine(system, rule)).losses
    return BenefitReport(baseline, tuple(bool(x) for x in c < base),
                         tuple(bool(x) for x in c <= base))


def benefit_exclusion_check(system: System, rule: WeightingRule, baseline: str = "human",
                            combined=None) -> ConditionReport:
    """Universal benefit and complementarity never co-occur.

    ``lhs`` and ``rhs`` are the two flags as 0/1; the report is satisfied when
    they are not both 1.
    """
    combined = combined if combined is not None else combine(system, rule)
    benefit = fairness_of_benefit(system, rule, baseline, combined)
    comp = is_complementary(system, rule, combined)
    notes = []
    if all(benefit.weak) and not benefit.overall:
        notes.append("every regime weakly benefits; some only with equality")
    return ConditionReport(
        f"benefit-exclusion[{baseline}]", float(benefit.overall), float(comp.satisfied),
        not (benefit.overall and comp.satisfied), relation="nand", notes=notes,
        details={"per_regime": benefit.strict, "weak": benefit.weak})


def loss_disparity(profile) -> float:
    """Spread ``max - min`` of per-regime losses."""
    losses = profile.losses if isinstance(profile, LossProfile) else np.asarray(profile, float)
    return float(np.max(losses) - np.min(losses))


def disparity_lower_bound(system: System, rule: WeightingRule, combined=None) -> ConditionReport:
    """``(A - C) + (H - A) E[s] < eps_a + eps_h``, which every complementary
    system satisfies (algorithm role oriented to the lower average)."""
    combined = combined if combined is not None else combine(system, rule)
    o = orient(system, combined.weights)
    lhs = (o.A - combined.average) + (o.H - o.A) * float(o.p @ o.s)
    rhs = loss_disparity(system.a) + loss_disparity(system.h)
    comp = is_complementary(system, rule, combined)
    notes = o.note()
    if not comp.satisfied:
        notes.append("not complementary: the bound carries no guarantee here")
    return ConditionReport("disparity-lower-bound", lhs, rhs, lhs < rhs, notes=notes,
                           details={"complementary": comp.satisfied})


def disparity_containment(system: System, rule: WeightingRule, combined=None) -> ConditionReport:
    """Combined disparity against ``max(eps_a, eps_h)``.

    Let ``i+``/``i-`` be the regimes of highest/lowest combined loss (lowest
    index on ties).  When neither predictor is better at both of them,
    ``eps_c <= max(eps_a, eps_h)`` is guaranteed; ``details["precondition"]``
    records whether that is the case.
    """
    combined = combined if combined is not None else combine(system, rule)
    c = combined.losses
    a, h = system.a, system.h
    top, bottom = int(np.argmax(c)), int(np.argmin(c))
    precondition = bool((h[top] <= a[top] and h[bottom] >= a[bottom])
                        or (h[top] >= a[top] and h[bottom] <= a[bottom]))
    eps_c = loss_disparity(c)
    eps_a, eps_h = loss_disparity(a), loss_disparity(h)
    bound = max(eps_a, eps_h)
    notes = []
    if not precondition:
        notes.append(f"precondition failed: one predictor is better in both regime "
                     f"{top + 1} (highest combined) and regime {bottom + 1} (lowest)")
    return ConditionReport(
        "disparity-containment", eps_c, bound, eps_c <= bound + CONTAINMENT_TOL,
        relation="<=", notes=notes,
        details={"precondition": precondition, "i_plus": top + 1, "i_minus": bottom + 1,
                 "eps_a": eps_a, "eps_h": eps_h, "eps_c": eps_c})


@dataclass
class FairnessAudit:
    benefits_vs_human: tuple[bool, ...]
    benefits_vs_algorithm: tuple[bool, ...]
    eps_h: float
    eps_a: float
    eps_c: float
    lower_bound: ConditionReport
    containment: ConditionReport

    def to_dict(self):
        return {
            "benefits_vs_human": list(self.benefits_vs_human),
            "benefits_vs_algorithm": list(self.benefits_vs_algorithm),
            "eps_h": self.eps_h, "eps_a": self.eps_a, "eps_c": self.eps_c,
            "disparity_lower_bound": self.lower_bound.to_dict(),
            "disparity_containment": self.containment.to_dict(),
        }


def fairness_audit(system: System, rule: WeightingRule, combined=None) -> FairnessAudit:
    combined = combined if combined is not None else combine(system, rule)
    return FairnessAudit(
        fairness_of_benefit(system, rule, "human", combined).strict,
        fairness_of_benefit(system, rule, "algorithm", combined).strict,
        loss_disparity(system.h), loss_disparity(system.a), loss_disparity(combined.losses),
        disparity_lower_bound(system, rule, combined),
        disparity_containment(system, rule, combined))
