"""Attack graph: vulnerability nodes, directed exploit edges, and per-node
exploitation probabilities re-estimated from observed exploit counts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AttackGraph:
    """Layered DAG rooted at a distinguished attacker node.

    Vulnerability nodes are 0..n-1; the attacker root gets id n.  Probabilities
    are tracked per node; edges are kept for display and path inspection only.
    """

    nodes: list
    attacker_root: int
    edges: set = field(default_factory=set)
    exploit_counts: np.ndarray = None
    exploit_probs: np.ndarray = None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


def generate(n_nodes: int, seed: int, edge_density: float = 0.4) -> AttackGraph:
    """Random layered DAG: root -> layer 1 -> ... with Bernoulli(edge_density)
    edges between consecutive layers; parentless nodes are attached to the
    root so every vulnerability stays reachable."""
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    if not 0.0 < edge_density <= 1.0:
        raise ValueError("edge_density must be in (0, 1]")
    rng = np.random.default_rng(seed)
    root = n_nodes

    # Split node ids into consecutive layers of random width.
    layers = []
    remaining = list(range(n_nodes))
    while remaining:
        width = int(rng.integers(1, max(2, (len(remaining) + 1) // 2) + 1))
        layers.append(remaining[:width])
        remaining = remaining[width:]

    edges = {(root, v) for v in layers[0]}
    for prev, cur in zip(layers[:-1], layers[1:]):
        for v in cur:
            parents = [p for p in prev if rng.random() < edge_density]
            if not parents:
                parents = [root]
            edges.update((p, v) for p in parents)

    return AttackGraph(
        nodes=list(range(n_nodes)),
        attacker_root=root,
        edges=edges,
        exploit_counts=np.zeros(n_nodes, dtype=np.int64),
        exploit_probs=np.full(n_nodes, 1.0 / n_nodes),
    )


def record_exploit(graph: AttackGraph, node: int) -> AttackGraph:
    """Increment the observed exploit count of a vulnerability node.

    Probabilities are untouched until `refresh_probabilities` runs."""
    if node not in range(graph.n_nodes):
        raise ValueError(f"unknown vulnerability node {node}")
    graph.exploit_counts[node] += 1
    return graph


def refresh_probabilities(graph: AttackGraph) -> AttackGraph:
    """Re-normalize exploitation probabilities from counts.

    With no observations yet the uniform prior is kept (the estimate is
    undefined at zero total count)."""
    total = int(graph.exploit_counts.sum())
    if total > 0:
        graph.exploit_probs = graph.exploit_counts / total
    else:
        graph.exploit_probs = np.full(graph.n_nodes, 1.0 / graph.n_nodes)
    return graph


def reachable_from_root(graph: AttackGraph) -> set:
    """Nodes reachable from the attacker root by directed edges."""
    adj = {}
    for parent, child in graph.edges:
        adj.setdefault(parent, []).append(child)
    seen = set()
    stack = [graph.attacker_root]
    while stack:
        node = stack.pop()
        for child in adj.get(node, ()):
            if child not in seen:
                seen.add(child)
                stack.append(child)
    return seen


def to_json(graph: AttackGraph) -> dict:
    return {
        "nodes": list(graph.nodes),
        "attacker_root": graph.attacker_root,
        "edges": sorted([list(e) for e in graph.edges]),
        "exploit_counts": graph.exploit_counts.tolist(),
        "exploit_probs": graph.exploit_probs.tolist(),
    }


def from_json(data: dict) -> AttackGraph:
    return AttackGraph(
        nodes=list(data["nodes"]),
        attacker_root=int(data["attacker_root"]),
        edges={tuple(e) for e in data["edges"]},
        exploit_counts=np.asarray(data["exploit_counts"], dtype=np.int64),
        exploit_probs=np.asarray(data["exploit_probs"], dtype=np.float64),
    )
