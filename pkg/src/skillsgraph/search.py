"""Hyperparameter grid search with stratified cross-validation.

The dataset is split 70/30 (stratified, seeded), every grid configuration is
scored by mean accuracy over stratified folds of the training split, the best
configuration is refit on the full training split, and that single model is
scored once on the held-out test split. Ties on mean accuracy prefer the
shallower tree, then the larger leaf minimum, then the criterion name in
ascending order: the least complex model that achieves the score.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientSamples
from .prepare import PreparedDataset, stratified_folds, stratified_split
from .tree import DecisionTree, TreeParams, accuracy, fit_tree


@dataclass(frozen=True)
class GridSpec:
    max_depths: tuple[int, ...]
    min_samples_leaves: tuple[int, ...]
    criteria: tuple[str, ...] = ("entropy", "gini")

    def configs(self) -> list[TreeParams]:
        return [
            TreeParams(max_depth=d, min_samples_leaf=m, criterion=c)
            for d in self.max_depths
            for m in self.min_samples_leaves
            for c in self.criteria
        ]


@dataclass(frozen=True)
class CVRow:
    config_id: int
    params: TreeParams
    mean_accuracy: float
    std_accuracy: float


@dataclass(frozen=True)
class GridSearchResult:
    best_params: TreeParams
    cv_table: tuple[CVRow, ...]
    test_accuracy: float
    model: DecisionTree
    train_size: int
    test_size: int


def grid_search_cv(
    data: PreparedDataset,
    grid: GridSpec,
    folds: int = 5,
    seed: int = 0,
    train_fraction: float = 0.7,
) -> GridSearchResult:
    train, test = stratified_split(data, train_fraction=train_fraction, seed=seed)

    class_sizes = np.bincount(train.y.astype(int))
    present = class_sizes[class_sizes > 0]
    if len(present) and present.min() < folds:
        raise InsufficientSamples(
            f"smallest class has {int(present.min())} training rows, need >= {folds} for {folds}-fold CV"
        )

    fold_indices = stratified_folds(train.y, folds, seed=seed)
    fold_sets = [set(f.tolist()) for f in fold_indices]
    all_rows = np.arange(len(train))

    cv_table: list[CVRow] = []
    for config_id, params in enumerate(grid.configs()):
        scores = []
        for k in range(folds):
            held = fold_sets[k]
            fit_rows = np.array([i for i in all_rows if i not in held], dtype=int)
            model = fit_tree(train.subset(fit_rows), params)
            scores.append(accuracy(model, train.subset(fold_indices[k])))
        scores = np.array(scores)
        cv_table.append(
            CVRow(
                config_id=config_id,
                params=params,
                mean_accuracy=float(scores.mean()),
                std_accuracy=float(scores.std()),
            )
        )

    best = min(
        cv_table,
        key=lambda row: (
            -row.mean_accuracy,
            row.params.max_depth,
            -row.params.min_samples_leaf,
            row.params.criterion,
        ),
    )
    model = fit_tree(train, best.params)
    return GridSearchResult(
        best_params=best.params,
        cv_table=tuple(cv_table),
        test_accuracy=accuracy(model, test),
        model=model,
        train_size=len(train),
        test_size=len(test),
    )


def save_cv_table(rows: Sequence[CVRow], path) -> None:
    """CSV report: config_id,max_depth,min_samples_leaf,criterion,mean_acc,std_acc."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["config_id", "max_depth", "min_samples_leaf", "criterion", "mean_acc", "std_acc"])
        for row in rows:
            writer.writerow(
                [
                    row.config_id,
                    row.params.max_depth,
                    row.params.min_samples_leaf,
                    row.params.criterion,
                    repr(row.mean_accuracy),
                    repr(row.std_accuracy),
                ]
            )
