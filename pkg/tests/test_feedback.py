"""Plan scoring, weight updates, and the iterative re-optimization loop."""

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skillsgraph import (
    DependencyEdge,
    FeedbackConfig,
    MetricsReport,
    SkillNode,
    build_graph,
    execute_plan,
    run_feedback_cycle,
    update_weights,
)
from skillsgraph.errors import (
    EmptyPlan,
    MetricOutOfRange,
    MetricsExhausted,
    MetricsFormatError,
    MissingOutcome,
    UnknownEdge,
)
from skillsgraph.feedback import load_metrics, metrics_from_dict, save_history, snapshot_to_dict


def chain_graph(weights=(1.0, 1.0)):
    nodes = [SkillNode(f"n{i}", f"N{i}", 1.0, 1.0) for i in range(len(weights) + 1)]
    edges = [DependencyEdge(f"n{i}", f"n{i+1}", w) for i, w in enumerate(weights)]
    return build_graph(nodes, edges)


class TestExecutePlan:
    def test_ratio(self):
        metrics = MetricsReport(action_outcomes={"a": 0.9, "b": 0.8, "c": 0.2, "d": 0.7})
        report = execute_plan(["a", "b", "c", "d"], metrics)
        assert report.success_rate == 0.75

    def test_all_above_threshold(self):
        metrics = MetricsReport(action_outcomes={"a": 0.6, "b": 0.9})
        assert execute_plan(["a", "b"], metrics).success_rate == 1.0

    def test_empty_plan(self):
        with pytest.raises(EmptyPlan):
            execute_plan([], MetricsReport())

    def test_missing_outcome(self):
        with pytest.raises(MissingOutcome):
            execute_plan(["a", "b"], MetricsReport(action_outcomes={"a": 1.0}))

    def test_order_invariant(self):
        metrics = MetricsReport(action_outcomes={"a": 0.9, "b": 0.1, "c": 0.5})
        forward = execute_plan(["a", "b", "c"], metrics).success_rate
        backward = execute_plan(["c", "b", "a"], metrics).success_rate
        assert forward == backward

    def test_custom_threshold(self):
        metrics = MetricsReport(action_outcomes={"a": 0.9, "b": 0.8})
        assert execute_plan(["a", "b"], metrics, threshold=0.85).success_rate == 0.5


class TestUpdateWeights:
    def config(self, eta=0.5, **kw):
        return FeedbackConfig(learning_rate=eta, **kw)

    def test_declared_rule(self):
        g = chain_graph([1.0])
        out = update_weights(g, MetricsReport(edge_metrics={("n0", "n1"): 2.0}), self.config())
        assert out.edge("n0", "n1").weight == 1.5

    def test_fixed_point(self):
        g = chain_graph([0.7])
        out = update_weights(g, MetricsReport(edge_metrics={("n0", "n1"): 0.7}), self.config())
        assert out.edge("n0", "n1").weight == 0.7

    def test_clamp_to_floor(self):
        g = chain_graph([0.02])
        out = update_weights(
            g, MetricsReport(edge_metrics={("n0", "n1"): 0.0}), self.config(eta=1.0)
        )
        assert out.edge("n0", "n1").weight == 0.01

    def test_unmetered_edges_unchanged(self):
        g = chain_graph([1.0, 3.0])
        out = update_weights(g, MetricsReport(edge_metrics={("n0", "n1"): 0.5}), self.config())
        assert out.edge("n1", "n2").weight == 3.0

    def test_input_graph_untouched(self):
        g = chain_graph([1.0])
        before = g.edge("n0", "n1").weight
        update_weights(g, MetricsReport(edge_metrics={("n0", "n1"): 0.2}), self.config())
        assert g.edge("n0", "n1").weight == before

    def test_unknown_edge(self):
        g = chain_graph([1.0])
        with pytest.raises(UnknownEdge):
            update_weights(g, MetricsReport(edge_metrics={("n1", "n0"): 0.5}), self.config())

    def test_metric_above_w_max_rejected(self):
        g = chain_graph([1.0])
        with pytest.raises(MetricOutOfRange):
            update_weights(g, MetricsReport(edge_metrics={("n0", "n1"): 10.5}), self.config())

    def test_negative_metric_rejected(self):
        g = chain_graph([1.0])
        with pytest.raises(MetricOutOfRange):
            update_weights(g, MetricsReport(edge_metrics={("n0", "n1"): -0.1}), self.config())

    @given(
        st.floats(min_value=0.05, max_value=9.0),
        st.floats(min_value=0.0, max_value=10.0),
        st.floats(min_value=0.01, max_value=1.0),
    )
    @settings(max_examples=80, deadline=None)
    def test_weights_stay_in_bounds(self, w0, m, eta):
        g = chain_graph([w0])
        config = FeedbackConfig(learning_rate=eta)
        for _ in range(5):
            g = update_weights(g, MetricsReport(edge_metrics={("n0", "n1"): m}), config)
            assert config.w_min <= g.edge("n0", "n1").weight <= config.w_max


class TestConfigValidation:
    @pytest.mark.parametrize("eta", [0.0, -0.5, 1.5])
    def test_bad_learning_rate(self, eta):
        with pytest.raises(MetricOutOfRange):
            FeedbackConfig(learning_rate=eta)

    def test_bad_bounds(self):
        with pytest.raises(MetricOutOfRange):
            FeedbackConfig(learning_rate=0.5, w_min=2.0, w_max=1.0)

    def test_negative_iterations(self):
        with pytest.raises(MetricOutOfRange):
            FeedbackConfig(learning_rate=0.5, iterations=-1)


class TestFeedbackCycle:
    def test_geometric_decay_over_20_iterations(self):
        w0, m, eta = 3.0, 0.5, 0.3
        g = chain_graph([w0])
        config = FeedbackConfig(learning_rate=eta, iterations=20)
        stream = [MetricsReport(edge_metrics={("n0", "n1"): m})] * 20
        history = run_feedback_cycle(g, stream, config, budget=1.0)
        initial_gap = abs(w0 - m)
        for k, snap in enumerate(history.snapshots):
            want = (1 - eta) ** k * initial_gap
            got = abs(snap.weights[("n0", "n1")] - m)
            assert got == pytest.approx(want, rel=1e-9)

    def test_zero_iterations_initial_snapshot_only(self):
        g = chain_graph([2.0])
        config = FeedbackConfig(learning_rate=0.5, iterations=0)
        history = run_feedback_cycle(g, [], config, budget=1.0)
        assert len(history.snapshots) == 1
        assert history.snapshots[0].weights == {("n0", "n1"): 2.0}
        assert history.final_graph == g

    @pytest.mark.parametrize("iterations", [1, 3, 7])
    def test_history_length(self, iterations):
        g = chain_graph([1.0])
        config = FeedbackConfig(learning_rate=0.5, iterations=iterations)
        stream = [MetricsReport(edge_metrics={("n0", "n1"): 0.8})] * iterations
        history = run_feedback_cycle(g, stream, config, budget=1.0)
        assert len(history.snapshots) == iterations + 1
        assert [s.iteration for s in history.snapshots] == list(range(iterations + 1))

    def test_dry_stream(self):
        g = chain_graph([1.0])
        config = FeedbackConfig(learning_rate=0.5, iterations=3)
        with pytest.raises(MetricsExhausted):
            run_feedback_cycle(g, [MetricsReport()], config, budget=1.0)

    def test_snapshots_carry_reoptimized_state(self):
        g = build_graph(
            [SkillNode("a", "A", 2.0, 1.0, capacity=1.0), SkillNode("b", "B", 1.0, 1.0, capacity=1.0)],
            [DependencyEdge("a", "b", 1.0)],
        )
        config = FeedbackConfig(learning_rate=1.0, iterations=1)
        stream = [MetricsReport(edge_metrics={("a", "b"): 4.0})]
        history = run_feedback_cycle(g, stream, config, budget=1.5)
        first, last = history.snapshots
        assert first.centrality == {"a": 1.0, "b": 0.0}
        assert last.weights[("a", "b")] == 4.0
        assert last.allocation.allocation == {"a": 1.0, "b": 0.5}
        assert last.allocation.objective == 2.5


class TestMetricsFiles:
    def test_round_trip(self, tmp_path):
        payload = {
            "iterations": [
                {"edge_metrics": {"n0->n1": 0.8}, "action_outcomes": {"n0": 0.9}},
                {"edge_metrics": {"n0->n1": 2.5}},
            ]
        }
        p = tmp_path / "m.json"
        p.write_text(json.dumps(payload))
        reports = load_metrics(p)
        assert len(reports) == 2
        assert reports[0].edge_metrics == {("n0", "n1"): 0.8}
        assert reports[0].action_outcomes == {"n0": 0.9}
        assert reports[1].edge_metrics == {("n0", "n1"): 2.5}

    @pytest.mark.parametrize(
        "payload",
        [
            {"iterations": [{"edge_metrics": {"n0n1": 0.8}}]},
            {"iterations": [{"edge_metrics": {"n0->n1": -0.2}}]},
            {"iterations": [{"edge_metrics": {"n0->n1": "high"}}]},
            {"iterations": [{"action_outcomes": {"a": 1.5}}]},
            {"iterations": [{"oops": {}}]},
            {"rounds": []},
            [],
        ],
    )
    def test_malformed_rejected(self, payload):
        with pytest.raises(MetricsFormatError):
            metrics_from_dict(payload)

    def test_history_jsonl(self, tmp_path):
        g = chain_graph([1.0])
        config = FeedbackConfig(learning_rate=0.5, iterations=2)
        stream = [MetricsReport(edge_metrics={("n0", "n1"): 0.5})] * 2
        history = run_feedback_cycle(g, stream, config, budget=1.0)
        out = tmp_path / "history.jsonl"
        save_history(history, out)
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        parsed = [json.loads(line) for line in lines]
        assert [row["iteration"] for row in parsed] == [0, 1, 2]
        assert parsed[1]["weights"] == {"n0->n1": 0.75}
        assert parsed[0] == snapshot_to_dict(history.snapshots[0])
