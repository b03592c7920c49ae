"""Shared fixtures: the five-node demo graph and random-instance builders."""

import random

import pytest

from skillsgraph import DependencyEdge, SkillNode, build_graph

# The hand-checkable demo graph used throughout: five staged capacities with
# every earlier stage feeding the later ones, all arrows pointing at v5.
DEMO_NODES = [
    SkillNode("v1", "Training Programs", 6.0, 5.0),
    SkillNode("v2", "Technological Infrastructure", 5.0, 4.0),
    SkillNode("v3", "Human Resources Development", 4.0, 3.0),
    SkillNode("v4", "Incident Response Planning", 3.0, 2.0),
    SkillNode("v5", "Strategic Planning", 2.0, 1.0),
]

DEMO_EDGE_PAIRS = [
    ("v1", "v2"),
    ("v1", "v3"),
    ("v2", "v3"),
    ("v2", "v4"),
    ("v3", "v4"),
    ("v1", "v5"),
    ("v2", "v5"),
    ("v3", "v5"),
    ("v4", "v5"),
]


def demo_graph(weights=None, objective_costs=None):
    """The five-node graph; per-edge weights/objective costs are optional maps."""
    weights = weights or {}
    objective_costs = objective_costs or {}
    edges = [
        DependencyEdge(a, b, weights.get((a, b), 1.0), objective_costs.get((a, b), 0.0))
        for a, b in DEMO_EDGE_PAIRS
    ]
    return build_graph(DEMO_NODES, edges)


@pytest.fixture
def five_node_graph():
    return demo_graph()


def random_dag(rng: random.Random, max_nodes: int = 8, weight_choices=None, objective_choices=None):
    """Random DAG over v1..vn: edges only go forward in id order, so acyclic."""
    n = rng.randint(2, max_nodes)
    nodes = [
        SkillNode(f"v{i}", f"node {i}", rng.randint(0, 9) * 1.0, rng.randint(1, 9) * 1.0)
        for i in range(1, n + 1)
    ]
    weight_choices = weight_choices or [0.25, 0.5, 1.0, 1.5, 2.0, 3.0]
    objective_choices = objective_choices or [0.0, 0.5, 1.0, 2.0, 5.0]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.5:
                edges.append(
                    DependencyEdge(
                        f"v{i + 1}",
                        f"v{j + 1}",
                        rng.choice(weight_choices),
                        rng.choice(objective_choices),
                    )
                )
    return build_graph(nodes, edges)
