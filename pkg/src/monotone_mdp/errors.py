"""Exception types raised across the package."""


class MdpError(Exception):
    """Base class for all package errors."""


class InvalidModel(MdpError, ValueError):
    """Model arrays violate a structural invariant."""


class DimensionMismatch(InvalidModel):
    """Array shapes are inconsistent with (X, U, N)."""


class InvalidProbability(MdpError, ValueError):
    pass


class IndexOutOfRange(MdpError, IndexError):
    pass


class ConstrainedModelError(MdpError):
    """Raised by the DP oracle, which only handles unconstrained models."""


class SingularSystem(MdpError):
    """The ADMM KKT matrix could not be factored (rank-deficient A)."""


class ZeroDirection(MdpError):
    """Subgradient step direction vanished; the caller should skip the step."""


class ConfigError(MdpError, ValueError):
    pass


class GenerationFailed(MdpError):
    pass


class ModelFileError(MdpError):
    """A model or policy file could not be parsed or validated.

    The message is prefixed with the offending path inside the document
    (for example ``P[0][1][2]``) or with a line number for syntax errors.
    """
