"""
Hand-built forests with known answers.

association_forest: five trees over f1..f4 whose majority paths use the
feature sets {f1,f2,f4}, {f1,f3,f4}, {f1,f2,f4}, {f3,f4}, {f4}. With a
quorum of 3 the association-rule step keeps f1, f3, f4 and the paths of
trees 2, 4 and 5.

intersection_forest: three trees over one feature f1 in [0, 1] whose
paths for f1 = 0.5 are f1 <= 0.6, 0.469 < f1 <= 0.6 and 0 < f1 <= 1.
"""

from typing import Sequence

from domain.forest import FeatureKind, FeatureMeta, Forest, Instance, Internal, Leaf, TreeNode
from services.dataset_service import ScalerState


ASSOCIATION_ITEMSETS: tuple[tuple[int, ...], ...] = (
    (0, 1, 3),
    (0, 2, 3),
    (0, 1, 3),
    (2, 3),
    (3,),
)

VOTE_ONE = Leaf((0, 3))
VOTE_ZERO = Leaf((3, 0))


def numeric_features(
    names: Sequence[str], low: float = -1.0, high: float = 1.0
) -> tuple[FeatureMeta, ...]:
    return tuple(FeatureMeta(name, FeatureKind.NUMERIC, low, high) for name in names)


def identity_scaler(features: Sequence[FeatureMeta]) -> ScalerState:
    """Scaler that leaves every column untouched."""
    return ScalerState(
        columns=tuple(m.name for m in features),
        mins=tuple(m.global_min for m in features),
        maxs=tuple(m.global_max for m in features),
        scaled=tuple(False for _ in features),
    )


def chain_tree(feature_indices: Sequence[int], leaf: Leaf = VOTE_ONE) -> TreeNode:
    """
    A tree whose path for the all-zero instance tests exactly the given
    features, alternating '<= 0.5' and '> -0.5'. Every branch off the path
    votes the other class.
    """
    other = VOTE_ZERO if leaf.vote == 1 else VOTE_ONE
    node: TreeNode = leaf
    for depth, feature in reversed(list(enumerate(feature_indices))):
        if depth % 2 == 0:
            node = Internal(feature, 0.5, left=node, right=other)
        else:
            node = Internal(feature, -0.5, left=other, right=node)
    return node


def association_forest() -> Forest:
    features = numeric_features(["f1", "f2", "f3", "f4"])
    trees = tuple(chain_tree(items) for items in ASSOCIATION_ITEMSETS)
    return Forest(trees=trees, features=features, importances=(0.25, 0.25, 0.25, 0.25))


def association_instance() -> Instance:
    return Instance.of([0.0, 0.0, 0.0, 0.0])


def intersection_forest() -> Forest:
    features = numeric_features(["f1"], 0.0, 1.0)
    trees = (
        # f1 <= 0.6
        Internal(0, 0.6, left=VOTE_ONE, right=VOTE_ZERO),
        # f1 <= 0.6 and f1 > 0.469
        Internal(0, 0.6, left=Internal(0, 0.469, left=VOTE_ZERO, right=VOTE_ONE), right=VOTE_ZERO),
        # f1 > 0 and f1 <= 1
        Internal(0, 0.0, left=VOTE_ZERO, right=Internal(0, 1.0, left=VOTE_ONE, right=VOTE_ZERO)),
    )
    return Forest(trees=trees, features=features, importances=(1.0,))


def intersection_instance() -> Instance:
    return Instance.of([0.5])
