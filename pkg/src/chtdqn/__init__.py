"""Attacker/defender cloud-security game toolkit: attack graphs, a
deterministic joint-action environment, DQN agents, a cognitive-hierarchy
defense layer, exact small-instance oracles, scenario orchestration, and a
round-based human defense game service."""

__version__ = "0.1.0"

__all__ = [
    "agents",
    "approximator",
    "attack_graph",
    "cognitive",
    "environment",
    "game_service",
    "oracle",
    "orchestrator",
]
