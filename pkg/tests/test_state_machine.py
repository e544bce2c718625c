from app.state_machine import ReductionStateMachine
from domain.events import PathsExtracted, ReductionFinished, TechniqueApplied, TechniqueSkipped
from domain.reduction import Technique
from domain.states import ReductionStage


def _run_to_trimmed(machine: ReductionStateMachine) -> None:
    machine.transition(PathsExtracted(1, 10, 10))
    machine.transition(TechniqueApplied(Technique.ASSOCIATION_RULES, 10, 7, 3))
    machine.transition(TechniqueSkipped(Technique.CLUSTERING, "disabled"))
    machine.transition(TechniqueApplied(Technique.RANDOM_SELECTION, 7, 6, 3))


class TestReductionStateMachine:

    def test_full_run(self):
        machine = ReductionStateMachine()
        _run_to_trimmed(machine)
        assert machine.current_stage == ReductionStage.TRIMMED
        assert machine.transition(ReductionFinished(6, 3)) == ReductionStage.DONE
        assert len(machine.history) == 5

    def test_technique_out_of_order_is_blocked(self):
        machine = ReductionStateMachine()
        machine.transition(PathsExtracted(0, 8, 10))
        result = machine.transition(TechniqueSkipped(Technique.CLUSTERING, "disabled"))
        assert result is None
        assert machine.current_stage == ReductionStage.EXTRACTED
        assert len(machine.history) == 1

    def test_finish_requires_all_techniques(self):
        machine = ReductionStateMachine()
        machine.transition(PathsExtracted(1, 10, 10))
        assert machine.transition(ReductionFinished(10, 4)) is None

    def test_extract_only_once(self):
        machine = ReductionStateMachine()
        machine.transition(PathsExtracted(1, 10, 10))
        assert machine.transition(PathsExtracted(1, 10, 10)) is None

    def test_allowed_transitions(self):
        machine = ReductionStateMachine()
        assert machine.get_allowed_transitions() == [PathsExtracted]
        assert machine.get_allowed_transitions(ReductionStage.CLUSTERED) == [
            TechniqueApplied, TechniqueSkipped,
        ]
        assert machine.get_allowed_transitions(ReductionStage.DONE) == []

    def test_fired_flag(self):
        assert TechniqueApplied(Technique.CLUSTERING, 10, 8).fired
        assert not TechniqueApplied(Technique.CLUSTERING, 10, 10).fired
