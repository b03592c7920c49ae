"""Impurity math, tree induction, prediction, and importance.

The impurity oracle re-evaluates the formulas directly (independent of the
module's vectorized code paths) over random count vectors.
"""

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skillsgraph import (
    DecisionTree,
    PreparedDataset,
    TreeParams,
    accuracy,
    entropy,
    feature_importance,
    fit_tree,
    gini,
    information_gain,
    predict,
)
from skillsgraph.errors import (
    BadParams,
    EmptyCounts,
    EmptyTrainingSet,
    MissingFeature,
    ModelFormatError,
    PartitionMismatch,
)
from skillsgraph.prepare import PreprocessStats
from skillsgraph.tree import load_tree, predict_many, save_tree, tree_from_dict, tree_to_dict


def direct_entropy(counts):
    total = sum(counts)
    return -sum((c / total) * math.log2(c / total) for c in counts if c)


def direct_gini(counts):
    total = sum(counts)
    return 1.0 - sum((c / total) ** 2 for c in counts)


def dataset(X, y, names=None):
    X = np.asarray(X, dtype=float)
    names = tuple(names or [f"f{j}" for j in range(X.shape[1])])
    stats = PreprocessStats(columns=(), feature_names=names)
    return PreparedDataset(X=X, y=np.asarray(y, dtype=int), feature_names=names, stats=stats)


XOR = dataset([[0, 0], [0, 1], [1, 0], [1, 1]], [0, 1, 1, 0])


class TestImpurity:
    @pytest.mark.parametrize(
        "counts,want",
        [((2, 2), 1.0), ((4, 0), 0.0), ((1, 1, 1, 1), 2.0)],
    )
    def test_entropy_fixtures(self, counts, want):
        assert entropy(counts) == pytest.approx(want, abs=1e-12)

    @pytest.mark.parametrize(
        "counts,want",
        [((2, 2), 0.5), ((7, 0), 0.0), ((1, 3), 0.375)],
    )
    def test_gini_fixtures(self, counts, want):
        assert gini(counts) == pytest.approx(want, abs=1e-12)

    def test_1000_random_vectors_match_direct_formulas(self):
        rng = random.Random(314)
        for _ in range(1000):
            k = rng.randint(1, 6)
            counts = [rng.randint(0, 50) for _ in range(k)]
            if sum(counts) == 0:
                counts[rng.randrange(k)] = 1
            assert entropy(counts) == pytest.approx(direct_entropy(counts), abs=1e-10)
            assert gini(counts) == pytest.approx(direct_gini(counts), abs=1e-10)

    def test_bounds_and_purity(self):
        rng = random.Random(600)
        for _ in range(200):
            k = rng.randint(1, 5)
            counts = [rng.randint(0, 30) for _ in range(k)]
            if sum(counts) == 0:
                counts[0] = 1
            h, g = entropy(counts), gini(counts)
            assert -1e-12 <= h <= math.log2(k) + 1e-12
            assert -1e-12 <= g <= 1 - 1 / k + 1e-12
            pure = sum(1 for c in counts if c) == 1
            assert (h == 0.0) == pure
            assert (g == 0.0) == pure

    def test_empty_counts(self):
        with pytest.raises(EmptyCounts):
            entropy((0, 0))
        with pytest.raises(EmptyCounts):
            gini(())

    def test_negative_counts(self):
        with pytest.raises(PartitionMismatch):
            entropy((-1, 2))


class TestInformationGain:
    def test_perfect_split(self):
        assert information_gain((2, 2), [(2, 0), (0, 2)]) == pytest.approx(1.0, abs=1e-12)

    def test_proportional_children_zero_gain(self):
        assert information_gain((4, 2), [(2, 1), (2, 1)]) == pytest.approx(0.0, abs=1e-12)

    def test_hand_value(self):
        got = information_gain((3, 1), [(2, 0), (1, 1)])
        assert got == pytest.approx(0.8112781244591328 - 0.5, abs=1e-4)

    def test_gini_criterion(self):
        got = information_gain((2, 2), [(2, 0), (0, 2)], criterion="gini")
        assert got == pytest.approx(0.5, abs=1e-12)

    def test_partition_mismatch(self):
        with pytest.raises(PartitionMismatch):
            information_gain((3, 1), [(2, 0), (0, 2)])

    def test_unknown_criterion(self):
        with pytest.raises(BadParams):
            information_gain((2, 2), [(2, 0), (0, 2)], criterion="chi2")

    def test_nonnegative_over_random_partitions(self):
        rng = random.Random(42)
        for _ in range(300):
            k = rng.randint(2, 4)
            left = [rng.randint(0, 20) for _ in range(k)]
            right = [rng.randint(0, 20) for _ in range(k)]
            parent = [a + b for a, b in zip(left, right)]
            if sum(parent) == 0 or sum(left) == 0 or sum(right) == 0:
                continue
            for criterion in ("entropy", "gini"):
                assert information_gain(parent, [left, right], criterion) >= -1e-12

    def test_log_base_rescales_without_changing_argmax(self):
        # candidate splits ranked by bits-gain; the nats-gain of the winner
        # must be within float noise of the nats maximum
        rng = random.Random(52)
        ln2 = math.log(2.0)
        for _ in range(100):
            parent = [rng.randint(1, 15), rng.randint(1, 15)]
            candidates = []
            for _ in range(5):
                l0 = rng.randint(0, parent[0])
                l1 = rng.randint(0, parent[1])
                left, right = [l0, l1], [parent[0] - l0, parent[1] - l1]
                if sum(left) == 0 or sum(right) == 0:
                    continue
                candidates.append(information_gain(parent, [left, right]))
            if not candidates:
                continue
            nats = [g * ln2 for g in candidates]
            assert nats[candidates.index(max(candidates))] == pytest.approx(max(nats), abs=1e-12)


class TestFitTree:
    def test_xor_perfect_at_depth_two(self):
        params = TreeParams(max_depth=2, min_samples_leaf=1, criterion="entropy")
        model = fit_tree(XOR, params)
        assert model.depth == 2
        assert accuracy(model, XOR) == 1.0
        assert predict(model, [0.0, 1.0]) == 1
        assert predict(model, [1.0, 1.0]) == 0

    def test_single_class_single_leaf(self):
        data = dataset([[0.1], [0.5], [0.9]], [1, 1, 1])
        model = fit_tree(data, TreeParams(max_depth=5, min_samples_leaf=1, criterion="gini"))
        assert len(model.nodes) == 1
        assert model.nodes[0].kind == "leaf"
        assert model.nodes[0].prediction == 1
        assert model.depth == 0

    def test_max_depth_zero_majority_leaf(self):
        data = dataset([[0.0], [1.0], [0.5]], [0, 1, 1])
        model = fit_tree(data, TreeParams(max_depth=0, min_samples_leaf=1, criterion="entropy"))
        assert len(model.nodes) == 1
        assert model.nodes[0].prediction == 1

    def test_majority_tie_predicts_class_zero(self):
        data = dataset([[0.0], [1.0]], [1, 0])
        model = fit_tree(data, TreeParams(max_depth=0, min_samples_leaf=1, criterion="entropy"))
        assert model.nodes[0].prediction == 0

    def test_min_samples_leaf_blocks_split(self):
        data = dataset([[0.0], [0.2], [0.8], [1.0]], [0, 0, 1, 1])
        model = fit_tree(data, TreeParams(max_depth=4, min_samples_leaf=3, criterion="entropy"))
        # any split would leave a child below three rows
        assert len(model.nodes) == 1

    def test_empty_training_set(self):
        data = dataset(np.zeros((0, 2)), [])
        with pytest.raises(EmptyTrainingSet):
            fit_tree(data, TreeParams(max_depth=2, min_samples_leaf=1, criterion="entropy"))

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"max_depth": -1, "min_samples_leaf": 1, "criterion": "entropy"},
            {"max_depth": 2, "min_samples_leaf": 0, "criterion": "entropy"},
            {"max_depth": 2, "min_samples_leaf": 1, "criterion": "twoing"},
            {"max_depth": 2.5, "min_samples_leaf": 1, "criterion": "gini"},
        ],
    )
    def test_bad_params(self, kwargs):
        with pytest.raises(BadParams):
            TreeParams(**kwargs)

    def _structure_ok(self, model, params, n_rows):
        leaf_depths = []

        def walk(idx, depth):
            node = model.nodes[idx]
            if node.kind == "leaf":
                leaf_depths.append(depth)
                assert sum(node.class_counts) >= params.min_samples_leaf
            else:
                left, right = model.nodes[node.left], model.nodes[node.right]
                assert sum(left.class_counts) + sum(right.class_counts) == sum(node.class_counts)
                walk(node.left, depth + 1)
                walk(node.right, depth + 1)

        walk(0, 0)
        assert max(leaf_depths) <= params.max_depth
        assert max(leaf_depths) == model.depth
        assert sum(model.nodes[0].class_counts) == n_rows

    def test_structural_invariants_random_data(self):
        rng = np.random.default_rng(77)
        for trial in range(30):
            n = int(rng.integers(5, 60))
            d = int(rng.integers(1, 5))
            X = rng.random((n, d)).round(2)
            y = rng.integers(0, 2, n)
            data = dataset(X, y)
            params = TreeParams(
                max_depth=int(rng.integers(1, 6)),
                min_samples_leaf=int(rng.integers(1, 5)),
                criterion=("entropy", "gini")[trial % 2],
            )
            self._structure_ok(fit_tree(data, params), params, n)

    def test_deterministic_fit(self):
        rng = np.random.default_rng(5)
        X = rng.random((40, 3))
        y = rng.integers(0, 2, 40)
        data = dataset(X, y)
        params = TreeParams(max_depth=6, min_samples_leaf=2, criterion="entropy")
        assert tree_to_dict(fit_tree(data, params)) == tree_to_dict(fit_tree(data, params))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_training_rows_route_to_counted_leaves(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 40))
        X = rng.random((n, 2)).round(1)
        y = rng.integers(0, 2, n)
        data = dataset(X, y)
        model = fit_tree(data, TreeParams(max_depth=4, min_samples_leaf=1, criterion="gini"))
        # every training row lands on a leaf whose majority matches prediction
        for i in range(n):
            predict(model, X[i])  # must not raise
        assert 0.0 <= accuracy(model, data) <= 1.0


class TestPredict:
    def setup_method(self):
        self.model = fit_tree(XOR, TreeParams(max_depth=2, min_samples_leaf=1, criterion="entropy"))

    def test_mapping_rows(self):
        assert predict(self.model, {"f0": 0.0, "f1": 0.0}) == 0
        assert predict(self.model, {"f0": 1.0, "f1": 0.0}) == 1

    def test_missing_feature_mapping(self):
        with pytest.raises(MissingFeature):
            predict(self.model, {"f0": 0.0})

    def test_short_row(self):
        with pytest.raises(MissingFeature):
            predict(self.model, [0.0])

    def test_nan_feature(self):
        with pytest.raises(MissingFeature):
            predict(self.model, [0.0, float("nan")])

    def test_predict_many_matches_predict(self):
        rows = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]
        assert predict_many(self.model, rows) == [predict(self.model, r) for r in rows]


class TestImportance:
    def test_single_leaf_all_zero(self):
        data = dataset([[0.3], [0.4]], [1, 1])
        model = fit_tree(data, TreeParams(max_depth=3, min_samples_leaf=1, criterion="entropy"))
        imp = feature_importance(model)
        assert imp == {"f0": 0.0}

    def test_single_split_full_credit(self):
        data = dataset([[0.0, 0.9], [0.2, 0.4], [0.8, 0.1], [1.0, 0.7]], [0, 0, 1, 1])
        model = fit_tree(data, TreeParams(max_depth=1, min_samples_leaf=1, criterion="entropy"))
        imp = feature_importance(model)
        assert imp["f0"] == pytest.approx(1.0, abs=1e-12)
        assert imp["f1"] == 0.0

    def test_nonnegative_and_normalized(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            n = int(rng.integers(8, 60))
            X = rng.random((n, 3)).round(2)
            y = rng.integers(0, 2, n)
            model = fit_tree(dataset(X, y), TreeParams(max_depth=5, min_samples_leaf=2, criterion="gini"))
            imp = feature_importance(model)
            values = list(imp.values())
            assert all(v >= 0 for v in values)
            total = sum(values)
            assert total == pytest.approx(1.0, abs=1e-9) or total == 0.0

    def test_hand_computed_two_level_tree(self):
        # root: f0 <= 0.35 peels off three zeros (gain 0.3, weight 8/8);
        # depth 1: f1 <= 0.5 purifies the rest (gain 0.32, weight 5/8);
        # contributions 0.3 and 0.2 normalize to 0.6 / 0.4
        X = [
            [0.0, 0.0], [0.1, 1.0], [0.2, 0.0],
            [0.8, 1.0], [0.9, 1.0], [1.0, 1.0],
            [0.5, 0.0], [0.5, 1.0],
        ]
        y = [0, 0, 0, 1, 1, 1, 0, 1]
        model = fit_tree(dataset(X, y), TreeParams(max_depth=2, min_samples_leaf=1, criterion="gini"))
        imp = feature_importance(model)
        assert imp["f0"] == pytest.approx(0.6, abs=1e-9)
        assert imp["f1"] == pytest.approx(0.4, abs=1e-9)

    def test_train_cross_check(self):
        model = fit_tree(XOR, TreeParams(max_depth=2, min_samples_leaf=1, criterion="entropy"))
        assert feature_importance(model, XOR) == feature_importance(model)
        short = dataset([[0.0, 0.0]], [0])
        with pytest.raises(PartitionMismatch):
            feature_importance(model, short)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        model = fit_tree(XOR, TreeParams(max_depth=2, min_samples_leaf=1, criterion="entropy"))
        p = tmp_path / "model.json"
        save_tree(model, p)
        loaded = load_tree(p)
        assert tree_to_dict(loaded) == tree_to_dict(model)
        rows = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]
        assert predict_many(loaded, rows) == predict_many(model, rows)

    def test_byte_stable_save(self, tmp_path):
        model = fit_tree(XOR, TreeParams(max_depth=2, min_samples_leaf=1, criterion="entropy"))
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_tree(model, a)
        save_tree(model, b)
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.pop("nodes"),
            lambda d: d["nodes"][0].update(kind="branch"),
            lambda d: d.update(params={"max_depth": 2}),
        ],
    )
    def test_malformed_rejected(self, mutate):
        model = fit_tree(XOR, TreeParams(max_depth=2, min_samples_leaf=1, criterion="entropy"))
        payload = tree_to_dict(model)
        mutate(payload)
        with pytest.raises(ModelFormatError):
            tree_from_dict(payload)
