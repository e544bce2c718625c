"""
Association-rule reduction of a path set.

Paths become itemsets of the features they test (thresholds dropped).
mlxtend's apriori mines the frequent itemsets, association_rules splits
each into antecedent and consequent, and the rules are walked in
ascending confidence. Each rule's antecedent joins the kept feature set
until enough paths use only kept features.
"""

import math
from typing import Sequence, Union

import pandas as pd
from mlxtend.frequent_patterns import apriori, association_rules
from mlxtend.preprocessing import TransactionEncoder

from domain.mining import AssocRule, NoReduction, PathItemset, RuleReduction
from domain.paths import Path
from util.logging_setup import get_logger


logger = get_logger(__name__)


def itemsets_from_paths(paths: Sequence[Path]) -> list[PathItemset]:
    return [PathItemset(i, path.feature_set) for i, path in enumerate(paths)]


def _min_count(min_support: float, n_transactions: int) -> int:
    # tolerance keeps 0.2 * 5 from rounding up to 2
    return max(1, math.ceil(min_support * n_transactions - 1e-9))


def _transactions_frame(itemsets: Sequence[PathItemset]) -> pd.DataFrame:
    encoder = TransactionEncoder()
    encoded = encoder.fit_transform([sorted(s.items) for s in itemsets])
    return pd.DataFrame(encoded, columns=encoder.columns_)


def _frequent_frame(
    itemsets: Sequence[PathItemset], min_support: float, max_itemset_size: int
) -> pd.DataFrame:
    if not 0.0 <= min_support <= 1.0:
        raise ValueError(f"min_support must be in [0, 1], got {min_support}")
    n = len(itemsets)
    frame = _transactions_frame(itemsets)
    if frame.shape[1] == 0:
        return pd.DataFrame(columns=["support", "itemsets"])
    # count / n is the exact float apriori compares against
    threshold = _min_count(min_support, n) / n
    return apriori(frame, min_support=threshold, use_colnames=True, max_len=max_itemset_size)


def frequent_itemsets(
    itemsets: Sequence[PathItemset], min_support: float, max_itemset_size: int = 3
) -> dict[frozenset[int], int]:
    """Apriori: frequent itemsets up to max_itemset_size with their counts."""
    n = len(itemsets)
    if n == 0:
        return {}
    frequent = _frequent_frame(itemsets, min_support, max_itemset_size)
    return {
        frozenset(int(i) for i in items): int(round(support * n))
        for support, items in zip(frequent["support"], frequent["itemsets"])
    }


def _rule_order(rule: AssocRule) -> tuple:
    return (
        rule.confidence,
        -rule.support_antecedent,
        tuple(sorted(rule.antecedent)),
        tuple(sorted(rule.consequent)),
    )


def mine_rules(
    itemsets: Sequence[PathItemset], min_support: float = 0.1, max_itemset_size: int = 3
) -> list[AssocRule]:
    """
    All rules X => Y over the frequent itemsets, ascending by confidence.

    Ties: higher antecedent support first, then the antecedent and
    consequent as sorted index tuples. No frequent itemsets gives [].
    Confidence is recomputed from integer counts so equal ratios tie exactly.
    """
    n = len(itemsets)
    if n == 0:
        return []
    frequent = _frequent_frame(itemsets, min_support, max_itemset_size)
    if frequent.empty or frequent["itemsets"].map(len).max() < 2:
        return []
    table = association_rules(
        frequent, num_itemsets=n, metric="confidence", min_threshold=0.0
    )

    rules: list[AssocRule] = []
    columns = zip(
        table["antecedents"], table["consequents"], table["antecedent support"], table["support"]
    )
    for antecedents, consequents, lhs_support, support in columns:
        lhs = frozenset(int(i) for i in antecedents)
        rhs = frozenset(int(i) for i in consequents)
        lhs_count = int(round(lhs_support * n))
        count = int(round(support * n))
        rules.append(
            AssocRule(
                antecedent=lhs,
                consequent=rhs,
                support_antecedent=lhs_count / n,
                confidence=count / lhs_count,
            )
        )

    rules.sort(key=_rule_order)
    logger.debug(f"Mined {len(rules)} rules from {len(frequent)} frequent itemsets over {n} paths")
    return rules


def _survivors(paths: Sequence[Path], kept: frozenset[int]) -> list[Path]:
    return [p for p in paths if p.feature_set <= kept]


def reduce_by_rules(
    paths: Sequence[Path], rules: Sequence[AssocRule], quorum: int
) -> Union[RuleReduction, NoReduction]:
    """
    Grow the kept feature set from rule antecedents until >= quorum paths
    use only kept features.

    A rule whose antecedent is already kept is skipped. Consequents are
    never added.
    """
    if quorum < 1:
        raise ValueError(f"quorum must be >= 1, got {quorum}")

    kept: frozenset[int] = frozenset()
    survivors = _survivors(paths, kept)
    if len(survivors) >= quorum:
        return RuleReduction(survivors, kept)

    for rule in rules:
        if rule.antecedent <= kept:
            continue
        kept = kept | rule.antecedent
        survivors = _survivors(paths, kept)
        logger.debug(f"Rule {rule}: {len(kept)} features, {len(survivors)} paths valid")
        if len(survivors) >= quorum:
            return RuleReduction(survivors, kept)

    return NoReduction(
        f"rules exhausted with {len(survivors)} of {quorum} required paths"
    )
