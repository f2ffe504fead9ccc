"""Scenario analysis, plain-text rendering and CSV export."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .analysis import (ImpossibilityScreen, covariance_condition, exemplar_condition,
                       impossibility_screen, is_complementary, n2_condition)
from .fairness import BASELINES, FairnessAudit, benefit_exclusion_check, fairness_audit
from .model import CombinedProfile, combine, validate_assumptions
from .reports import ConditionReport
from .rules import Exemplar
from .scenario import Scenario, rule_to_dict

COLUMNS = ("human", "algorithm", "combined", "weight")


def fmt(x: float) -> str:
    """Nine significant digits, no negative zero, empty for NaN."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    x = float(x)
    if x == 0:
        x = 0.0
    return f"{x:.9g}"


@dataclass
class AnalysisReport:
    scenario: Scenario
    combined: CombinedProfile
    complementarity: ConditionReport
    assumptions: ConditionReport
    screen: Optional[ImpossibilityScreen] = None
    conditions: list[ConditionReport] = field(default_factory=list)
    fairness: Optional[FairnessAudit] = None

    def rows(self):
        """Per-regime rows then the average row, as ``(label, values)``."""
        system = self.scenario.system
        out = []
        for i in range(system.n):
            out.append((f"regime{i + 1}", (system.h[i], system.a[i], self.combined.losses[i],
                                           self.combined.weights[i])))
        out.append(("average", (system.human_average, system.algorithm_average,
                                self.combined.average, self.combined.weight_average)))
        return out

    def text(self) -> str:
        system = self.scenario.system
        lines = [f"scenario: {self.scenario.name}",
                 f"combiner: {self.scenario.combiner!r}",
                 f"{'':<10}{'Human':>8}{'Algorithm':>11}{'Combined':>10}{'Weight':>8}{'p':>7}"]
        for (label, values), p in zip(self.rows(), list(system.p) + [1.0]):
            name = "Average" if label == "average" else f"Regime {label[6:]}"
            h, a, c, s = values
            lines.append(f"{name:<10}{h:>8.2f}{a:>11.2f}{c:>10.2f}{s:>8.2f}{p:>7.2f}")
        gap = self.complementarity.details["gap"]
        verdict = "yes" if self.complementarity.satisfied else "no"
        lines.append(f"complementary: {verdict} (gap {gap:.3f})")
        if self.assumptions.satisfied:
            lines.append("assumptions: ok")
        else:
            lines.extend(f"assumptions: {n}" for n in self.assumptions.notes)
        if self.screen is not None:
            tags = ", ".join(sorted(self.screen.triggered)) or "none"
            lines.append(f"impossibility screen: {tags}")
            lines.extend(f"  {n}" for n in self.screen.notes)
        if self.conditions:
            lines.append("conditions:")
            for report in self.conditions:
                lines.append(f"  {report.summary()}")
                lines.extend(f"    {n}" for n in report.notes)
        if self.fairness is not None:
            f = self.fairness
            lines.append("fairness:")
            for baseline, flags in (("human", f.benefits_vs_human),
                                    ("algorithm", f.benefits_vs_algorithm)):
                marks = " ".join("+" if x else "-" for x in flags)
                lines.append(f"  benefit vs {baseline}: {marks}")
            lines.append(f"  disparity: eps_h {f.eps_h:.3f}  eps_a {f.eps_a:.3f}  eps_c {f.eps_c:.3f}")
            for report in (f.lower_bound, f.containment):
                lines.append(f"  {report.summary()}")
                lines.extend(f"    {n}" for n in report.notes)
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict[str, Any]:
        out = {
            "name": self.scenario.name,
            "combiner": rule_to_dict(self.scenario.combiner),
            "rows": [{"regime": label, **dict(zip(COLUMNS, map(float, values)))}
                     for label, values in self.rows()],
            "complementarity": self.complementarity.to_dict(),
            "assumptions": self.assumptions.to_dict(),
        }
        if self.screen is not None:
            out["impossibility"] = {"triggered": sorted(self.screen.triggered),
                                    "exact": sorted(self.screen.exact),
                                    "notes": list(self.screen.notes)}
        if self.conditions:
            out["conditions"] = [r.to_dict() for r in self.conditions]
        if self.fairness is not None:
            out["fairness"] = self.fairness.to_dict()
        return out


def condition_reports(scenario: Scenario, combined: Optional[CombinedProfile] = None):
    """Every sufficient/exclusion condition that applies to the scenario."""
    system, rule = scenario.system, scenario.combiner
    combined = combined if combined is not None else combine(system, rule)
    out = []
    if system.n == 2:
        out.append(n2_condition(system, rule, combined))
    out.append(covariance_condition(system, rule, combined))
    if isinstance(rule, Exemplar) and system.n == 2 and rule.m > 0:
        out.append(exemplar_condition(system, rule.b, rule.m))
    for baseline in BASELINES:
        out.append(benefit_exclusion_check(system, rule, baseline, combined))
    return out


def analyze(scenario: Scenario) -> AnalysisReport:
    system, rule = scenario.system, scenario.combiner
    combined = combine(system, rule)
    wanted = set(scenario.analyses)
    return AnalysisReport(
        scenario, combined,
        is_complementary(system, rule, combined),
        validate_assumptions(system, combined),
        impossibility_screen(system, rule) if "impossibility" in wanted else None,
        condition_reports(scenario, combined) if "conditions" in wanted else [],
        fairness_audit(system, rule, combined) if "fairness" in wanted else None)


# CSV ------------------------------------------------------------------------

def csv_rows(result):
    """Header and rows for anything ``export_csv`` accepts."""
    from .optimize import SweepResult
    from .reproduce import CurveSet, Reproduction

    if isinstance(result, Reproduction):
        return csv_rows(result.artifact)
    if isinstance(result, AnalysisReport):
        return (["regime", *COLUMNS],
                [[label, *map(fmt, values)] for label, values in result.rows()])
    if isinstance(result, SweepResult):
        header = ["delta_a", "delta_h", "masked", "combined", "s1", "s2", "complementary"]
        rows = []
        for i, da in enumerate(result.delta_a):
            for j, dh in enumerate(result.delta_h):
                rows.append([fmt(da), fmt(dh), str(int(result.masked[i, j])),
                             fmt(result.combined[i, j]), fmt(result.s1[i, j]),
                             fmt(result.s2[i, j]), str(int(result.complementary[i, j]))])
        return header, rows
    if isinstance(result, CurveSet):
        header = ["gap", *result.labels]
        rows = [[fmt(g), *(fmt(w) for w in ws)]
                for g, ws in zip(result.gaps, np.asarray(result.weights).T)]
        return header, rows
    raise TypeError(f"cannot export {type(result).__name__} as CSV")


def csv_text(result) -> str:
    import io

    header, rows = csv_rows(result)
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def export_csv(result, path) -> Path:
    """Write ``result`` as CRLF-terminated CSV with a header row."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(result))
    return path
