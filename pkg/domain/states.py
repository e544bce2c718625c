"""
Reduction stage definitions.

The pipeline moves through these stages in a fixed order; a stage whose
technique is disabled is skipped, never revisited.
"""

from enum import Enum


class ReductionStage(str, Enum):
    """
    Pipeline stages.

    States:
    - INIT: nothing computed yet
    - EXTRACTED: majority-voting paths extracted
    - RULES_APPLIED: association-rule reduction ran
    - CLUSTERED: k-medoids reduction ran
    - TRIMMED: random selection ran
    - DONE: final path set fixed
    """

    INIT = "INIT"
    EXTRACTED = "EXTRACTED"
    RULES_APPLIED = "RULES_APPLIED"
    CLUSTERED = "CLUSTERED"
    TRIMMED = "TRIMMED"
    DONE = "DONE"

    def __str__(self) -> str:
        return self.value
