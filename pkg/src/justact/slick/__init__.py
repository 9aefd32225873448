"""The Slick policy language: syntax, safety, and well-founded evaluation."""
from .evaluation import DEFAULT_BOUND, Denotation, dec_valid, evaluate, truth
from .parser import SlickSyntaxError, UnsafeRuleError, parse_atom, parse_fact, parse_policy, parse_rules
from .safety import SafetyViolation, dec_safe, safety_violations
from .terms import (
    ERROR,
    Atom,
    Cond,
    Fact,
    Kind,
    Policy,
    Rule,
    Sign,
    Var,
    compose,
    render,
)

__all__ = [
    "DEFAULT_BOUND", "Denotation", "dec_valid", "evaluate", "truth",
    "SlickSyntaxError", "UnsafeRuleError", "parse_atom", "parse_fact", "parse_policy", "parse_rules",
    "SafetyViolation", "dec_safe", "safety_violations",
    "ERROR", "Atom", "Cond", "Fact", "Kind", "Policy", "Rule", "Sign", "Var", "compose", "render",
]
