"""Shared fixtures: the demo world, scripted oracle, and graphs built from it.

Everything here is offline by construction; no fixture touches the network.
"""

from __future__ import annotations

import pytest

from pagegraph.agent import AgentConfig, AgentRunner
from pagegraph.builder import GraphBuilder
from pagegraph.embedding import HashingEmbedder
from pagegraph.model import PageGraph
from pagegraph.oracle import OracleClient
from pagegraph.world import ScriptedBackend, demo_world, generate_episodes, trail_cover_episodes


@pytest.fixture(scope="session")
def world():
    return demo_world()


@pytest.fixture(scope="session")
def embedder():
    return HashingEmbedder()


@pytest.fixture(scope="session")
def scripted_oracle(world):
    return OracleClient(ScriptedBackend(world), retries=0)


@pytest.fixture(scope="session")
def gold_episodes(world):
    return generate_episodes(world)


@pytest.fixture(scope="session")
def cover_episodes(world):
    return trail_cover_episodes(world)


def build_graph(world, oracle, embedder, episodes, scenario="demo"):
    graph = PageGraph(scenario=scenario)
    builder = GraphBuilder(graph, oracle, embedder)
    report = builder.ingest_corpus(episodes)
    return graph, report


@pytest.fixture(scope="session")
def task_graph(world, scripted_oracle, embedder, gold_episodes):
    """Graph built from the ten gold task episodes; treat as read-only."""
    graph, _ = build_graph(world, scripted_oracle, embedder, gold_episodes)
    return graph


@pytest.fixture(scope="session")
def cover_graph(world, scripted_oracle, embedder, cover_episodes):
    """Graph built from the transition-covering trails; treat as read-only."""
    graph, _ = build_graph(world, scripted_oracle, embedder, cover_episodes)
    return graph


@pytest.fixture()
def runner(world, scripted_oracle, embedder, task_graph):
    return AgentRunner(scripted_oracle, embedder, task_graph, AgentConfig())
