"""
Error hierarchy for the forest rule explainer.

Every error carries an error_code (stable, machine readable) and an
error_hint (short, human readable), the same pair the result objects
in services/ expose.
"""

from typing import Optional


class ExplainerError(Exception):
    """Base class for all domain errors."""

    error_code = "EXPLAINER_ERROR"

    def __init__(self, error_hint: str, error_code: Optional[str] = None) -> None:
        super().__init__(error_hint)
        self.error_hint = error_hint
        if error_code is not None:
            self.error_code = error_code


class ConfigError(ExplainerError):
    """config.toml missing, unparsable or invalid."""

    error_code = "CONFIG_INVALID"


class DataError(ExplainerError):
    """Dataset, metadata or instance input is unusable."""

    error_code = "DATA_INVALID"


class ModelError(ExplainerError):
    """Model bundle is missing or unusable."""

    error_code = "MODEL_INVALID"


class ModelParseError(ModelError):
    """Forest document violates the interchange schema."""

    error_code = "MODEL_PARSE"

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class PathError(ExplainerError):
    """Contradictory conditions in a path or a path set."""

    error_code = "PATH_INCONSISTENT"


class ReductionError(ExplainerError):
    """Reduction invoked with inputs that break the quorum contract."""

    error_code = "REDUCTION_INVALID"
