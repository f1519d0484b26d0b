"""Exception types shared across the package."""


class CovmarkError(Exception):
    """Base class for all covmark errors."""


class InvalidParamError(CovmarkError, ValueError):
    """A scalar or sequence argument is outside its admissible range."""


class DimensionMismatchError(CovmarkError, ValueError):
    """Operands have incompatible shapes."""


class NotSymmetricError(CovmarkError):
    """Matrix asymmetry exceeds what round-off repair may absorb."""


class NotPSDError(CovmarkError):
    """Matrix has an eigenvalue below the positive-semidefinite floor."""


class NotToeplitzError(CovmarkError):
    """Matrix entries are not constant along diagonals."""


class FactorizationError(CovmarkError):
    """Covariance factorization failed even after the one-shot jitter."""


class TooFewSamplesError(CovmarkError):
    """Batch is too small for the requested estimator."""


class SingularSumError(CovmarkError):
    """Combined covariance is numerically singular and may not be inverted."""


class DegenerateWatermarkError(CovmarkError):
    """Watermark covariance gives the attacker no correlation leverage."""


class ConfigError(CovmarkError):
    """Experiment configuration is missing, malformed, or inconsistent."""
