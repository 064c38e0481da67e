"""Exception hierarchy.

Every error raised on purpose by the package derives from ``PolariJsaError`` so
callers (notably the CLI) can map families of failures onto exit codes.
"""

from __future__ import annotations


class PolariJsaError(Exception):
    """Base class for all package errors."""


class ConfigError(PolariJsaError, ValueError):
    """The configuration document does not match the schema."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class ValidationError(PolariJsaError, ValueError):
    """A parameter is well-formed but violates a physical invariant."""

    def __init__(self, field: str, bound: str, value=None):
        self.field = field
        self.bound = bound
        self.value = value
        detail = f" (got {value!r})" if value is not None else ""
        super().__init__(f"{field} must satisfy {bound}{detail}")


class NumericError(PolariJsaError, ArithmeticError):
    """Base class for failures of a numerical evaluation."""


class SingularityError(NumericError):
    """Evaluation requested at (or numerically on top of) a pole."""


class DegenerateSpectrumError(NumericError):
    """The two polariton poles coincide, so the simple-pole expansion breaks down."""


class QuadratureError(NumericError):
    """Adaptive quadrature did not reach the requested tolerance.

    ``estimate`` and ``error`` carry the best values obtained; ``trace`` holds
    the number of subdivisions spent per integral.
    """

    def __init__(self, message: str, estimate=None, error=None, trace=None):
        self.estimate = estimate
        self.error = error
        self.trace = trace
        super().__init__(message)


class ModeError(PolariJsaError, ValueError):
    """The requested evaluation path is incompatible with the input source."""


class SymmetryDomainError(PolariJsaError, ValueError):
    """Symmetrization needs a square grid with identical axes."""


class UndefinedEntropyError(PolariJsaError, ValueError):
    """Entropy of an identically zero amplitude is undefined."""


class GridLoadError(PolariJsaError, ValueError):
    """Base class for problems reading a jsa-grid file."""


class GridFileNotFound(GridLoadError, FileNotFoundError):
    pass


class MalformedGridHeader(GridLoadError):
    pass


class NonUniformAxisError(GridLoadError):
    pass


class NonFiniteAmplitudeError(GridLoadError):
    pass
