from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one executable check.

    ``slack`` is signed: positive values measure how far the checked
    inequality is violated.  ``passed`` is always ``slack <= tolerance``.
    """

    name: str
    passed: bool
    slack: float
    tolerance: float
    witness: dict | None = None
    details: dict = field(default_factory=dict)

    @classmethod
    def from_slack(cls, name, slack, tolerance, witness=None, **details):
        slack = float(slack)
        tolerance = float(tolerance)
        return cls(name, slack <= tolerance, slack, tolerance, witness, details)
