"""Exception types shared across the package."""


class MitlabError(Exception):
    """Base class for all package errors."""


class DimensionError(MitlabError):
    """Raised when an operation gets a model of an unsupported or mismatched dimension."""


class FormatError(MitlabError):
    """Raised when a model or profile file fails validation."""


class PipelineError(MitlabError):
    """Raised when the obstruction pipeline's slope hypothesis fails."""


class OracleError(MitlabError):
    """Raised when quadrature produces a nonfinite integrand (should not happen for valid models)."""
