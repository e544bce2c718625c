"""
Feature-range rules as presented to the user.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class ClauseKind(str, Enum):
    NUMERIC_RANGE = "numeric_range"
    CATEGORICAL_EQUALS = "categorical_equals"
    ORDINAL_SET = "ordinal_set"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RuleClause:
    """
    One conjunct of a rule.

    Numeric clauses carry bounds in original units; categorical clauses
    carry one category; ordinal clauses carry the admitted categories.
    Hidden clauses keep their data and are only collapsed when rendered.
    """

    feature_name: str
    kind: ClauseKind
    importance: float
    lower: Optional[float] = None
    upper: Optional[float] = None
    lower_open: bool = False
    upper_open: bool = False
    category: Optional[str] = None
    categories: tuple[str, ...] = ()
    hidden: bool = False

    @property
    def is_categorical(self) -> bool:
        return self.kind is not ClauseKind.NUMERIC_RANGE


@dataclass(frozen=True)
class CategoryAlternatives:
    """Partition of a one-hot group's categories around the asserted value."""

    asserted: Optional[str]
    may_affect: tuple[str, ...]
    preserves: tuple[str, ...]


@dataclass(frozen=True)
class Rule:
    clauses: tuple[RuleClause, ...]
    predicted_class_label: str
    alternatives: dict[str, CategoryAlternatives] = field(default_factory=dict)

    @property
    def visible_clauses(self) -> tuple[RuleClause, ...]:
        return tuple(c for c in self.clauses if not c.hidden)

    @property
    def hidden_count(self) -> int:
        return sum(1 for c in self.clauses if c.hidden)
