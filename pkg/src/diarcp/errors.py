"""Exception types shared across the package."""


class DiarcpError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(DiarcpError):
    """Input data violates a documented precondition."""


class InvalidParameterError(DiarcpError):
    """A tuning parameter is outside its legal range."""


class DegenerateInputError(DiarcpError):
    """Input is formally valid but numerically unusable (e.g. a zero-degree node)."""


class NumericalError(DiarcpError):
    """A numerical routine failed (singular system, no convergence)."""


class ClusteringError(DiarcpError):
    """Clustering could not produce a labeling."""


class UndefinedMetricError(DiarcpError):
    """The requested metric is undefined for this input (e.g. empty reference)."""


class ParseError(DiarcpError):
    """A file could not be parsed; the message carries path and line/field context."""


class PipelineStageError(DiarcpError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
