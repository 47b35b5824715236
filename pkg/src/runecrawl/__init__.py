"""runecrawl: a desk-scale deterministic roguelike evaluation environment.

Structured observations out, actions in, PDDL export of the non-combat world
model, macro actions, custom scenarios, spectator chat, and a metrics
harness, all behind a newline-delimited JSON gateway.
"""

__version__ = "0.1.0"

from .actions import Action
from .config import DungeonConfig
from .engine import GameState, ObservedState, StepResult, new_game, observe, step
from .metrics import MetricsReport, aggregate, episode_metrics, state_space_lower_bound
from .scenario import ScenarioSpec, instantiate_scenario, parse_scenario, render_scenario

__all__ = [
    "Action", "DungeonConfig", "GameState", "ObservedState", "StepResult",
    "new_game", "observe", "step",
    "MetricsReport", "aggregate", "episode_metrics", "state_space_lower_bound",
    "ScenarioSpec", "instantiate_scenario", "parse_scenario", "render_scenario",
    "__version__",
]
