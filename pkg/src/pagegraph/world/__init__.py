"""Deterministic GUI micro-world: spec, environments, generators, scripted oracle."""

from pagegraph.world.demo import demo_world
from pagegraph.world.environment import EpisodeReplayerEnvironment, WorldEnvironment
from pagegraph.world.generate import (
    generate_episodes,
    random_world,
    trail_cover_episodes,
    true_page_graph,
)
from pagegraph.world.scripted import ScriptedBackend, summarize_world_action
from pagegraph.world.spec import Page, TaskSpec, Widget, WorldSpec, state_digest, state_pairs

__all__ = [
    "EpisodeReplayerEnvironment",
    "Page",
    "ScriptedBackend",
    "TaskSpec",
    "Widget",
    "WorldEnvironment",
    "WorldSpec",
    "demo_world",
    "generate_episodes",
    "random_world",
    "state_digest",
    "state_pairs",
    "summarize_world_action",
    "trail_cover_episodes",
    "true_page_graph",
]
