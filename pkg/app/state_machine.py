"""
State machine for the reduction pipeline.

Validates stage transitions and records the events that caused them.
All stage changes are logged.
"""

from typing import Optional

from domain.events import (
    PathsExtracted,
    PipelineEvent,
    ReductionFinished,
    TechniqueApplied,
    TechniqueSkipped,
)
from domain.reduction import Technique
from domain.states import ReductionStage
from util.logging_setup import get_logger


logger = get_logger(__name__)


# Stage a technique event leads to, from the stage it must start in.
_TECHNIQUE_STEPS: dict[Technique, tuple[ReductionStage, ReductionStage]] = {
    Technique.ASSOCIATION_RULES: (ReductionStage.EXTRACTED, ReductionStage.RULES_APPLIED),
    Technique.CLUSTERING: (ReductionStage.RULES_APPLIED, ReductionStage.CLUSTERED),
    Technique.RANDOM_SELECTION: (ReductionStage.CLUSTERED, ReductionStage.TRIMMED),
}


class ReductionStateMachine:
    """
    Drives one reduce() call through its stages.

    Every technique reports either TechniqueApplied or TechniqueSkipped,
    so the stages are always visited in the same order. Invalid
    transitions are blocked and return None.
    """

    def __init__(self, initial_stage: ReductionStage = ReductionStage.INIT) -> None:
        self._current_stage = initial_stage
        self._history: list[PipelineEvent] = []
        logger.debug(f"ReductionStateMachine initialized with stage: {self._current_stage}")

    @property
    def current_stage(self) -> ReductionStage:
        return self._current_stage

    @property
    def history(self) -> tuple[PipelineEvent, ...]:
        """Accepted events in order."""
        return tuple(self._history)

    def transition(self, event: PipelineEvent) -> Optional[ReductionStage]:
        """
        Attempt a stage transition.

        Returns:
            New stage if the transition is valid, None if blocked
        """
        new_stage = self._calculate_transition(self._current_stage, event)

        if new_stage is None:
            logger.warning(
                f"Invalid transition blocked: {self._current_stage} --{type(event).__name__}--> (blocked)"
            )
            return None

        old_stage = self._current_stage
        self._current_stage = new_stage
        self._history.append(event)
        logger.debug(f"Stage transition: {old_stage} --{type(event).__name__}--> {new_stage}")
        return new_stage

    def _calculate_transition(
        self, from_stage: ReductionStage, event: PipelineEvent
    ) -> Optional[ReductionStage]:
        """
        Transition rules:
        - INIT --PathsExtracted--> EXTRACTED
        - EXTRACTED --association rules applied/skipped--> RULES_APPLIED
        - RULES_APPLIED --clustering applied/skipped--> CLUSTERED
        - CLUSTERED --random selection applied/skipped--> TRIMMED
        - TRIMMED --ReductionFinished--> DONE
        """
        if isinstance(event, PathsExtracted):
            return ReductionStage.EXTRACTED if from_stage == ReductionStage.INIT else None

        if isinstance(event, (TechniqueApplied, TechniqueSkipped)):
            expected, target = _TECHNIQUE_STEPS[event.technique]
            return target if from_stage == expected else None

        if isinstance(event, ReductionFinished):
            return ReductionStage.DONE if from_stage == ReductionStage.TRIMMED else None

        logger.warning(f"Unknown event type: {type(event).__name__}")
        return None

    def get_allowed_transitions(
        self, stage: Optional[ReductionStage] = None
    ) -> list[type[PipelineEvent]]:
        """Event types accepted in the given stage (default: current stage)."""
        if stage is None:
            stage = self._current_stage

        if stage == ReductionStage.INIT:
            return [PathsExtracted]
        if stage in (
            ReductionStage.EXTRACTED,
            ReductionStage.RULES_APPLIED,
            ReductionStage.CLUSTERED,
        ):
            return [TechniqueApplied, TechniqueSkipped]
        if stage == ReductionStage.TRIMMED:
            return [ReductionFinished]
        return []
