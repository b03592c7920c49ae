"""Shortest and resource-constrained paths through the dependency graph.

Path cost is the sum of edge weights; each edge also consumes objective_cost,
and a query may cap the total consumption at tau. Unconstrained queries run
plain Dijkstra. Constrained ones run bi-criteria label setting with Pareto
pruning, since a pricier prefix that consumes less can still win later.

All comparisons happen on exact integer renditions of the float inputs (see
exact.py), so optima and ties are well-defined and reproducible.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidQuery, NoFeasiblePath, UnknownNode
from .exact import integer_sum_to_float, scale_to_integers
from .graph import SkillsGraph, validate_dag


@dataclass(frozen=True)
class Path:
    nodes: tuple[str, ...]
    cost: float
    objective: float


def path_to_dict(path: Path) -> dict:
    return {"nodes": list(path.nodes), "cost": path.cost, "objective": path.objective}


def _check_endpoints(graph: SkillsGraph, source: str, target: str) -> None:
    for nid in (source, target):
        if not graph.has_node(nid):
            raise UnknownNode(f"unknown node {nid!r}")


def _scaled_edges(graph: SkillsGraph):
    """Exact integer weight and consumption per edge, plus the denominators."""
    weights, wden = scale_to_integers([e.weight for e in graph.edges])
    consumption, cden = scale_to_integers([e.objective_cost for e in graph.edges])
    w = {(e.src, e.dst): weights[i] for i, e in enumerate(graph.edges)}
    f = {(e.src, e.dst): consumption[i] for i, e in enumerate(graph.edges)}
    return w, wden, f, cden


def _dijkstra(graph: SkillsGraph, source: str, target: str) -> tuple[int, int, tuple[str, ...]]:
    w, _, f, _ = _scaled_edges(graph)
    # heap keys (cost, path) break cost ties by lexicographic node sequence
    heap = [(0, (source,))]
    done = set()
    while heap:
        cost, path = heapq.heappop(heap)
        node = path[-1]
        if node in done:
            continue
        done.add(node)
        if node == target:
            obj = sum(f[(a, b)] for a, b in zip(path, path[1:]))
            return cost, obj, path
        for edge in graph.out_edges(node):
            if edge.dst not in done:
                heapq.heappush(heap, (cost + w[(node, edge.dst)], path + (edge.dst,)))
    raise NoFeasiblePath(f"no path from {source!r} to {target!r}")


def _label_setting(
    graph: SkillsGraph, source: str, target: str, tau: float
) -> tuple[int, int, tuple[str, ...]]:
    w, _, f, cden = _scaled_edges(graph)
    tau_frac = Fraction(tau)

    def pruned_by(label, other) -> bool:
        # other makes label redundant: never better on consumption, and either
        # strictly cheaper, or same cost with a path that wins every tie
        lc, lo, lp = label
        oc, oo, op = other
        if (lc, lo, lp) == (oc, oo, op):
            return False
        return oo <= lo and (oc < lc or (oc == lc and op <= lp))

    frontier: dict[str, list] = {nid: [] for nid in graph.node_ids()}
    start = (0, 0, (source,))
    frontier[source].append(start)
    work = [start]
    while work:
        label = work.pop()
        node = label[2][-1]
        if label not in frontier[node]:
            continue  # pruned after being queued
        if node == target:
            continue  # extensions of a target label never improve it
        cost, obj, path = label
        for edge in graph.out_edges(node):
            nxt = (cost + w[(node, edge.dst)], obj + f[(node, edge.dst)], path + (edge.dst,))
            bucket = frontier[edge.dst]
            if any(pruned_by(nxt, kept) for kept in bucket):
                continue
            bucket[:] = [kept for kept in bucket if not pruned_by(kept, nxt)]
            bucket.append(nxt)
            work.append(nxt)

    feasible = [lab for lab in frontier[target] if Fraction(lab[1], cden) <= tau_frac]
    if not feasible:
        raise NoFeasiblePath(
            f"no path from {source!r} to {target!r} with consumption <= {tau}"
        )
    return min(feasible, key=lambda lab: (lab[0], lab[2]))


def find_optimal_path(
    graph: SkillsGraph, source: str, target: str, tau: float | None = None
) -> Path:
    """Cheapest path by total weight, optionally capping objective consumption.

    Among equal-cost feasible paths the lexicographically smallest node
    sequence is returned. tau=None means unconstrained.
    """
    _check_endpoints(graph, source, target)
    if tau is not None and (not math.isfinite(tau) or tau < 0):
        raise InvalidQuery(f"tau must be finite and >= 0, got {tau!r}")
    if source == target:
        return Path(nodes=(source,), cost=0.0, objective=0.0)

    _, wden, _, cden = _scaled_edges(graph)
    if tau is None:
        cost, obj, nodes = _dijkstra(graph, source, target)
    else:
        cost, obj, nodes = _label_setting(graph, source, target, tau)
    return Path(
        nodes=nodes,
        cost=integer_sum_to_float(cost, wden),
        objective=integer_sum_to_float(obj, cden),
    )


def enumerate_paths(graph: SkillsGraph, source: str, target: str) -> list[Path]:
    """Every simple path source -> target, depth-first in edge insertion order.

    Requires an acyclic graph; raises CycleDetected otherwise.
    """
    _check_endpoints(graph, source, target)
    validate_dag(graph)
    w, wden, f, cden = _scaled_edges(graph)

    results: list[Path] = []

    def walk(path: tuple[str, ...], cost: int, obj: int) -> None:
        node = path[-1]
        if node == target:
            results.append(
                Path(path, integer_sum_to_float(cost, wden), integer_sum_to_float(obj, cden))
            )
            return
        for edge in graph.out_edges(node):
            walk(path + (edge.dst,), cost + w[(node, edge.dst)], obj + f[(node, edge.dst)])

    walk((source,), 0, 0)
    return results
