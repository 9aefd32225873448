"""Rule safety: every head variable must occur in a positive truth condition."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from .terms import Rule, variables


@dataclass(frozen=True)
class SafetyViolation:
    variable: str
    rule: Rule
    index: Optional[int] = None
    line: Optional[int] = None
    column: Optional[int] = None

    def __str__(self) -> str:
        where = f"{self.line}:{self.column}: " if self.line is not None else ""
        return f"{where}unsafe rule {self.rule.render()!r}: head variable {self.variable} is not bound by a positive condition"


def bound_variables(rule: Rule) -> set:
    return {v for cond in rule.body if cond.binds for v in variables(cond.atom)}


def safety_violations(rule: Rule, **where) -> List[SafetyViolation]:
    bound = bound_variables(rule)
    seen = []
    for name in variables(rule.head):
        if name not in bound and name not in seen:
            seen.append(name)
    return [SafetyViolation(name, rule, **where) for name in seen]


def dec_safe(rule: Rule) -> bool:
    return not safety_violations(rule)
