"""Carrier type for evaluated conditions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

# Strict comparisons in sufficient conditions must clear this margin so that
# a satisfied condition still implies complementarity after float rounding.
CONDITION_MARGIN = 1e-9


@dataclass
class ConditionReport:
    """One evaluated inequality ``lhs <relation> rhs``.

    ``relation`` is one of ``"<"``, ``"<="`` or ``"=="``; ``satisfied`` records
    whether it holds.  ``details`` carries auxiliary values (orientation,
    realized weights, alternative forms) for rendering and triage.
    """

    condition_id: str
    lhs: float
    rhs: float
    satisfied: bool
    relation: str = "<"
    notes: list[str] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "condition_id": self.condition_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relation": self.relation,
            "satisfied": self.satisfied,
            "notes": list(self.notes),
            "details": {k: _plain(v) for k, v in self.details.items()},
        }

    def summary(self, digits: int = 3) -> str:
        mark = "holds" if self.satisfied else "fails"
        return (f"{self.condition_id}: {self.lhs:.{digits}f} {self.relation} "
                f"{self.rhs:.{digits}f} ({mark})")


def _plain(value):
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value
