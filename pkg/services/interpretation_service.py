"""
Rule composition and rendering.

Turns the intersected feature ranges of a reduced path set into a rule in
original units: numeric ranges are inverse-scaled, one-hot groups collapse
to one asserted category plus alternative lists, ordinal ranges become the
set of admitted categories. Clauses are ordered by forest importance.
"""

from collections import defaultdict
from dataclasses import replace
from typing import Any, Iterable, Optional, Sequence

from domain.errors import DataError
from domain.forest import FeatureKind, FeatureMeta, Forest, Instance
from domain.paths import FeatureRange
from domain.rules import CategoryAlternatives, ClauseKind, Rule, RuleClause
from services.dataset_service import ScalerState
from util.logging_setup import get_logger


logger = get_logger(__name__)

ORDINAL_TOLERANCE = 1e-9


def format_bound(value: float, decimals: int = 2) -> str:
    """Round for display; trailing zeros dropped (0.60 -> 0.6, 2.00 -> 2)."""
    text = f"{value:.{decimals}f}"
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def map_onehot(
    ranges: Iterable[FeatureRange],
    features: Sequence[FeatureMeta],
    group: str,
    reduced_feature_set: Iterable[int],
    active_category: Optional[str] = None,
) -> CategoryAlternatives:
    """
    Classify the members of one one-hot group.

    A member whose range admits 1 but not 0 is the asserted category.
    A constrained member of the reduced set whose range admits 0 but not 1
    may affect the prediction. Every other category preserves it.
    active_category is asserted when no range asserts one.

    Raises:
        DataError: "inconsistent one-hot group" when two members are asserted
    """
    reduced = set(reduced_feature_set)
    by_index = {r.feature_index: r for r in ranges}
    members = [
        (i, m) for i, m in enumerate(features)
        if m.kind is FeatureKind.ONEHOT and m.group == group
    ]

    asserted: list[str] = []
    may_affect: list[str] = []
    preserves: list[str] = []
    for index, meta in members:
        rng = by_index.get(index)
        if rng is None:
            preserves.append(meta.category)
            continue
        has_one, has_zero = rng.contains(1.0), rng.contains(0.0)
        if has_one and not has_zero:
            asserted.append(meta.category)
        elif has_zero and not has_one and index in reduced:
            may_affect.append(meta.category)
        else:
            preserves.append(meta.category)

    if len(asserted) > 1:
        raise DataError(
            f"inconsistent one-hot group '{group}': {', '.join(asserted)} all asserted"
        )
    chosen = asserted[0] if asserted else active_category
    if chosen is not None and chosen in preserves:
        preserves.remove(chosen)
    return CategoryAlternatives(chosen, tuple(may_affect), tuple(preserves))


def map_ordinal(
    rng: FeatureRange, meta: FeatureMeta, scaler: Optional[ScalerState] = None
) -> list[str]:
    """
    Categories whose codes lie inside the range.

    With a scaler the range is taken as scaled and mapped back to codes
    first; without one it is already in code units.

    Raises:
        DataError: The range admits no code
    """
    if meta.kind is not FeatureKind.ORDINAL:
        raise ValueError(f"'{meta.name}' is not ordinal")
    if scaler is not None:
        lower = scaler.inverse_value(rng.feature_index, rng.lower)
        upper = scaler.inverse_value(rng.feature_index, rng.upper)
        rng = FeatureRange(rng.feature_index, lower, upper, rng.lower_open)
    admitted = [
        category
        for code, category in enumerate(meta.categories)
        if rng.contains(float(code), tol=ORDINAL_TOLERANCE)
    ]
    if not admitted:
        raise DataError(
            f"ordinal range ({rng.lower}, {rng.upper}] of '{meta.name}' admits no category"
        )
    return admitted


def _active_category(forest: Forest, group: str, instance: Optional[Instance]) -> Optional[str]:
    if instance is None:
        return None
    for index, meta in enumerate(forest.features):
        if meta.group == group and instance.values[index] >= 0.5:
            return meta.category
    return None


def compose_rule(
    ranges: Sequence[FeatureRange],
    forest: Forest,
    reduced_feature_set: Iterable[int],
    scaler: ScalerState,
    class_label: str,
    hide_last_n: int = 0,
    instance: Optional[Instance] = None,
) -> Rule:
    """
    Build the rule for a set of intersected ranges.

    One-hot groups are ordered by the summed importance of their members.
    hide_last_n larger than the clause count minus one is clamped so one
    clause stays visible. instance supplies the active category of a
    one-hot group none of whose ranges asserts one.
    """
    if hide_last_n < 0:
        raise ValueError(f"hide_last_n must be >= 0, got {hide_last_n}")
    reduced = frozenset(reduced_feature_set)
    features = forest.features
    importances = forest.importances

    # (importance, first feature index, clause)
    entries: list[tuple[float, int, RuleClause]] = []
    groups: dict[str, list[FeatureRange]] = defaultdict(list)

    for rng in ranges:
        meta = features[rng.feature_index]
        if meta.kind is FeatureKind.ONEHOT:
            groups[meta.group].append(rng)
        elif meta.kind is FeatureKind.ORDINAL:
            admitted = map_ordinal(rng, meta, scaler)
            clause = RuleClause(
                feature_name=meta.name,
                kind=ClauseKind.ORDINAL_SET,
                importance=importances[rng.feature_index],
                categories=tuple(admitted),
            )
            entries.append((clause.importance, rng.feature_index, clause))
        else:
            clause = RuleClause(
                feature_name=meta.name,
                kind=ClauseKind.NUMERIC_RANGE,
                importance=importances[rng.feature_index],
                lower=scaler.inverse_value(rng.feature_index, rng.lower),
                upper=scaler.inverse_value(rng.feature_index, rng.upper),
                lower_open=rng.lower_open,
                upper_open=rng.upper_open,
            )
            entries.append((clause.importance, rng.feature_index, clause))

    alternatives: dict[str, CategoryAlternatives] = {}
    for group, group_ranges in groups.items():
        mapped = map_onehot(
            group_ranges, features, group, reduced, _active_category(forest, group, instance)
        )
        alternatives[group] = mapped
        if mapped.asserted is None:
            continue
        member_indices = [i for i, m in enumerate(features) if m.group == group]
        clause = RuleClause(
            feature_name=group,
            kind=ClauseKind.CATEGORICAL_EQUALS,
            importance=sum(importances[i] for i in member_indices),
            category=mapped.asserted,
        )
        entries.append((clause.importance, min(member_indices), clause))

    entries.sort(key=lambda e: (-e[0], e[1]))
    clauses = [clause for _, _, clause in entries]

    if clauses and hide_last_n > len(clauses) - 1:
        logger.warning(
            f"hide_last={hide_last_n} would hide every clause; hiding {len(clauses) - 1}"
        )
        hide_last_n = len(clauses) - 1
    if hide_last_n:
        cut = len(clauses) - hide_last_n
        clauses = clauses[:cut] + [
            replace(c, hidden=True) for c in clauses[cut:]
        ]

    return Rule(tuple(clauses), class_label, alternatives)


def render_clause(clause: RuleClause, decimals: int = 2) -> str:
    if clause.kind is ClauseKind.NUMERIC_RANGE:
        lo = format_bound(clause.lower, decimals)
        hi = format_bound(clause.upper, decimals)
        return f"{lo} ≤ {clause.feature_name} ≤ {hi}"
    if clause.kind is ClauseKind.CATEGORICAL_EQUALS:
        return f"{clause.feature_name}^c = {clause.category}"
    if len(clause.categories) == 1:
        return f"{clause.feature_name}^c = {clause.categories[0]}"
    return f"{clause.feature_name}^c = [{', '.join(clause.categories)}]"


def render_rule(rule: Rule, decimals: int = 2) -> str:
    """if <clause> and ... [and [other n feature-ranges]] then <label>"""
    parts = [render_clause(c, decimals) for c in rule.visible_clauses]
    if rule.hidden_count:
        parts.append(f"[other {rule.hidden_count} feature-ranges]")
    body = " and ".join(parts) if parts else "true"
    return f"if {body} then {rule.predicted_class_label}"


def render_alternatives(rule: Rule) -> list[str]:
    """One line per one-hot group: the values that may affect / preserve the prediction."""
    lines = []
    for group, alt in sorted(rule.alternatives.items()):
        may = ", ".join(alt.may_affect) or "-"
        keep = ", ".join(alt.preserves) or "-"
        lines.append(f"{group}: may affect: {may}; preserves: {keep}")
    return lines


def rule_to_dict(rule: Rule) -> dict[str, Any]:
    """Machine-readable rule; bounds keep full precision."""
    clauses = []
    for c in rule.clauses:
        entry: dict[str, Any] = {
            "feature": c.feature_name,
            "kind": c.kind.value,
            "lower": c.lower,
            "upper": c.upper,
            "lower_open": c.lower_open,
            "upper_open": c.upper_open,
            "category": c.category,
            "importance": c.importance,
            "hidden": c.hidden,
        }
        if c.kind is ClauseKind.ORDINAL_SET:
            entry["categories"] = list(c.categories)
        clauses.append(entry)
    return {
        "clauses": clauses,
        "class": rule.predicted_class_label,
        "alternatives": {
            group: {
                "asserted": alt.asserted,
                "may_affect": list(alt.may_affect),
                "preserves": list(alt.preserves),
            }
            for group, alt in sorted(rule.alternatives.items())
        },
    }
