"""
Event definitions for the reduction pipeline.

Each stage of the pipeline emits one event describing what it did.
All events are frozen dataclasses.
"""

from dataclasses import dataclass
from typing import Optional

from domain.reduction import Technique


@dataclass(frozen=True)
class PipelineEvent:
    """
    Base class for all pipeline events.
    """
    pass


@dataclass(frozen=True)
class PathsExtracted(PipelineEvent):
    """Majority-voting paths collected."""
    predicted_class: int
    path_count: int
    n_estimators: int


@dataclass(frozen=True)
class TechniqueApplied(PipelineEvent):
    """A reduction technique ran; fired is True when it removed paths."""
    technique: Technique
    paths_before: int
    paths_after: int
    feature_count: Optional[int] = None

    @property
    def fired(self) -> bool:
        return self.paths_after < self.paths_before


@dataclass(frozen=True)
class TechniqueSkipped(PipelineEvent):
    """A technique was disabled or had nothing to reduce."""
    technique: Technique
    reason: str


@dataclass(frozen=True)
class ReductionFinished(PipelineEvent):
    path_count: int
    feature_count: int
