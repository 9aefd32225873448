"""Agent scripting and the bundled case-study scenarios."""
from .scenarios import (
    NonTermination,
    RunResult,
    ScenarioError,
    ScenarioSpec,
    bundled_names,
    load_scenario,
    run_scenario,
)
from .scripting import AgentScript, Context, step_agent

__all__ = [
    "NonTermination", "RunResult", "ScenarioError", "ScenarioSpec", "bundled_names",
    "load_scenario", "run_scenario", "AgentScript", "Context", "step_agent",
]
