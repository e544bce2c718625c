"""
Forest prediction.

Tree traversal, per-tree votes and the forest majority vote. Every
function is pure over an immutable Forest and safe to call from many
threads at once.
"""

from dataclasses import dataclass

import numpy as np

from domain.errors import DataError
from domain.forest import Forest, Instance, Internal, Leaf, TreeNode, check_instance
from domain.paths import Condition, Relation


@dataclass(frozen=True)
class Prediction:
    """Forest decision for one instance."""

    predicted_class: int
    votes_for_class: int
    n_estimators: int

    @property
    def votes_against(self) -> int:
        return self.n_estimators - self.votes_for_class


def decision_path(tree: TreeNode, values: tuple[float, ...]) -> tuple[tuple[Condition, ...], Leaf]:
    """
    Follow one tree from root to leaf.

    Returns:
        (conditions recorded on the way, reached leaf)
    """
    conditions: list[Condition] = []
    node = tree
    while isinstance(node, Internal):
        if values[node.feature_index] <= node.threshold:
            conditions.append(Condition(node.feature_index, Relation.LE, node.threshold))
            node = node.left
        else:
            conditions.append(Condition(node.feature_index, Relation.GT, node.threshold))
            node = node.right
    return tuple(conditions), node


def _leaf_for(tree: TreeNode, values: tuple[float, ...]) -> Leaf:
    node = tree
    while isinstance(node, Internal):
        node = node.left if values[node.feature_index] <= node.threshold else node.right
    return node


def tree_vote(tree: TreeNode, instance: Instance) -> int:
    """Class voted by one tree; leaf ties resolve to class 1."""
    return _leaf_for(tree, instance.values).vote


def majority_class(votes_for_one: int, n_estimators: int) -> int:
    # floor(votes/N + 1/2) in integer arithmetic
    return 1 if 2 * votes_for_one >= n_estimators else 0


def forest_predict(forest: Forest, instance: Instance) -> Prediction:
    """
    Majority vote of the forest.

    Class 1 iff floor(votes_1 / N + 1/2) = 1, so an exact split goes to
    class 1. votes_for_class counts the trees voting the returned class.
    """
    check_instance(forest, instance)
    votes_for_one = sum(_leaf_for(tree, instance.values).vote for tree in forest.trees)
    predicted = majority_class(votes_for_one, forest.n_estimators)
    votes_for_class = votes_for_one if predicted == 1 else forest.n_estimators - votes_for_one
    return Prediction(predicted, votes_for_class, forest.n_estimators)


def _tree_votes_batch(tree: TreeNode, X: np.ndarray) -> np.ndarray:
    votes = np.empty(X.shape[0], dtype=np.int64)
    stack: list[tuple[TreeNode, np.ndarray]] = [(tree, np.arange(X.shape[0]))]
    while stack:
        node, rows = stack.pop()
        if rows.size == 0:
            continue
        if isinstance(node, Leaf):
            votes[rows] = node.vote
            continue
        goes_left = X[rows, node.feature_index] <= node.threshold
        stack.append((node.left, rows[goes_left]))
        stack.append((node.right, rows[~goes_left]))
    return votes


def predict_batch(forest: Forest, X: np.ndarray) -> np.ndarray:
    """Vectorised forest_predict over the rows of X; returns int classes."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != forest.n_features:
        raise DataError(f"expected shape (n, {forest.n_features}), got {X.shape}")
    votes_for_one = np.zeros(X.shape[0], dtype=np.int64)
    for tree in forest.trees:
        votes_for_one += _tree_votes_batch(tree, X)
    return (2 * votes_for_one >= forest.n_estimators).astype(np.int64)
