"""Exception hierarchy shared by every module of the package."""


class AiryThinError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(AiryThinError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(AiryThinError, ValueError):
    """A model or run configuration is malformed or inconsistent."""


class NumericalError(AiryThinError, ArithmeticError):
    """Base class for failures of the numerical machinery."""


class DecayTooSlow(NumericalError):
    """The thinning function decays too slowly to truncate the domain."""


class SingularOperator(NumericalError):
    """The discretized operator could not be factorized."""


class IllConditioned(NumericalError):
    """A small matrix is too ill-conditioned to be solved reliably."""


class NonPositiveDeterminant(NumericalError):
    """A determinant that must be positive came out non-positive."""


class RegimeViolation(AiryThinError, ValueError):
    """An asymptotic comparator was requested outside its regime."""


class NumericalWarning(UserWarning):
    """Emitted when a double-precision result is likely inaccurate."""
