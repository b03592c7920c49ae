"""Budgeted resource allocation over graph nodes.

Two modes. select: 0/1 knapsack over node costs maximizing total
effectiveness, solved exactly by dynamic programming on costs quantized to
cents. fractional: divisible budget poured across nodes proportional to
nothing fancier than a greedy on effectiveness, which is exact for a linear
objective with box constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .errors import (
    CostPrecisionError,
    CostResolutionExceeded,
    NegativeBudget,
    UnknownNode,
)
from .exact import integer_sum_to_float, quantize_hundredths, scale_to_integers
from .graph import UNBOUNDED, SkillsGraph

DEFAULT_MAX_CELLS = 10_000_000


@dataclass(frozen=True)
class NodeSelection:
    """Result of select mode: a set of funded nodes."""

    chosen: tuple[str, ...]  # in graph node order
    objective: float
    budget: float


@dataclass(frozen=True)
class AllocationPlan:
    """Result of fractional mode: per-node resource amounts."""

    allocation: dict  # node id -> amount, graph node order, zero entries kept
    objective: float
    budget: float


def _check_budget(budget: float) -> None:
    if not (isinstance(budget, (int, float)) and math.isfinite(budget)) or budget < 0:
        raise NegativeBudget(f"budget must be finite and >= 0, got {budget!r}")


def select_knapsack(
    graph: SkillsGraph, budget: float, max_cells: int = DEFAULT_MAX_CELLS
) -> NodeSelection:
    """Exact 0/1 knapsack: maximize total effectiveness within the budget.

    Costs and budget are quantized to cents; finer precision is rejected, not
    rounded. Ties on the objective prefer fewer nodes, then the
    lexicographically smallest id set. Effectiveness sums are compared in
    exact arithmetic so ties are well-defined.
    """
    _check_budget(budget)
    try:
        cost_units = quantize_hundredths([n.cost for n in graph.nodes], "cost")
        (budget_units,) = quantize_hundredths([budget], "budget")
    except ValueError as exc:
        raise CostPrecisionError(str(exc)) from None

    n = len(graph.nodes)
    cap = min(budget_units, sum(cost_units))
    cells = (n + 1) * (cap + 1)
    if cells > max_cells:
        raise CostResolutionExceeded(
            f"knapsack table needs {cells} cells (> {max_cells}); "
            "coarsen costs or lower the budget"
        )

    values, denom = scale_to_integers([n_.effectiveness for n_ in graph.nodes])
    # process in ascending id order so the greedy reconstruction below yields
    # the lexicographically smallest optimal id set
    order = sorted(range(n), key=lambda i: graph.nodes[i].id)

    # suffix DP: best[i][w] = (max objective, min count) over items order[i:]
    obj = [[0] * (cap + 1) for _ in range(n + 1)]
    cnt = [[0] * (cap + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        item = order[i]
        c, f = cost_units[item], values[item]
        obj_row, cnt_row = obj[i], cnt[i]
        obj_next, cnt_next = obj[i + 1], cnt[i + 1]
        for w in range(cap + 1):
            best_obj, best_cnt = obj_next[w], cnt_next[w]
            if c <= w:
                take_obj = obj_next[w - c] + f
                take_cnt = cnt_next[w - c] + 1
                if take_obj > best_obj or (take_obj == best_obj and take_cnt < best_cnt):
                    best_obj, best_cnt = take_obj, take_cnt
            obj_row[w] = best_obj
            cnt_row[w] = best_cnt

    # include an item iff doing so still reaches the optimal (objective, count);
    # visiting ids in ascending order makes the surviving set lex-smallest
    chosen_ids = set()
    w = cap
    for i in range(n):
        item = order[i]
        c, f = cost_units[item], values[item]
        if c <= w and obj[i + 1][w - c] + f == obj[i][w] and cnt[i + 1][w - c] + 1 == cnt[i][w]:
            chosen_ids.add(graph.nodes[item].id)
            w -= c

    total = obj[0][cap]
    return NodeSelection(
        chosen=tuple(nid for nid in graph.node_ids() if nid in chosen_ids),
        objective=integer_sum_to_float(total, denom),
        budget=budget,
    )


def allocate_fractional(graph: SkillsGraph, budget: float) -> AllocationPlan:
    """Pour a divisible budget greedily by descending effectiveness.

    Exact for the linear objective: fill the most effective node to capacity,
    then the next, until the budget runs out. Ties go to the smaller node id;
    unbounded capacity means the node could absorb the whole budget. Nodes
    with zero effectiveness receive nothing.
    """
    _check_budget(budget)
    allocation = {nid: 0.0 for nid in graph.node_ids()}
    remaining = budget
    for node in sorted(graph.nodes, key=lambda n: (-n.effectiveness, n.id)):
        if remaining <= 0 or node.effectiveness <= 0:
            break
        room = float(remaining if node.capacity is UNBOUNDED else min(node.capacity, remaining))
        if room > 0:
            allocation[node.id] = room
            remaining -= room
    objective = math.fsum(
        graph.node(nid).effectiveness * amount for nid, amount in allocation.items()
    )
    return AllocationPlan(allocation=allocation, objective=objective, budget=budget)


def objective_value(graph: SkillsGraph, allocation: Mapping[str, float]) -> float:
    """Sum of effectiveness * amount over an allocation mapping."""
    for nid in allocation:
        if not graph.has_node(nid):
            raise UnknownNode(f"allocation references unknown node {nid!r}")
    return math.fsum(graph.node(nid).effectiveness * amount for nid, amount in allocation.items())


def plan_to_dict(plan) -> dict:
    """JSON form of either allocation result; inapplicable fields are absent."""
    if isinstance(plan, NodeSelection):
        return {
            "mode": "select",
            "budget": plan.budget,
            "chosen": list(plan.chosen),
            "objective": plan.objective,
        }
    if isinstance(plan, AllocationPlan):
        return {
            "mode": "fractional",
            "budget": plan.budget,
            "allocation": dict(plan.allocation),
            "objective": plan.objective,
        }
    raise TypeError(f"not an allocation result: {plan!r}")
