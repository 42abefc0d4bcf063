from __future__ import annotations

from typing import Final

EXIT_OK: Final[int] = 0
EXIT_VALIDATION: Final[int] = 2
EXIT_NUMERICAL: Final[int] = 3


class Rough1DError(Exception):
    """Base class for every error raised by rough1d."""


class ValidationError(Rough1DError, ValueError):
    """A precondition on the inputs does not hold."""


class GridAlignmentError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class UnknownFormulaError(ValidationError):
    pass


class MissingDerivativeError(ValidationError):
    pass


class OrderMismatchError(ValidationError):
    pass


class PrimitiveMismatchError(ValidationError):
    pass


class UndeclaredAreaError(ValidationError):
    pass


class DegenerateLadderError(ValidationError):
    pass


class ArtifactError(ValidationError):
    pass


class NumericalError(Rough1DError, RuntimeError):
    """The computation ran but its numerical outcome is unusable."""


class CovarianceError(NumericalError):
    pass


class NonContractionError(NumericalError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CoefficientRangeError(NumericalError):
    pass


class FlowBlowUpError(NumericalError):
    pass


class FlowDegeneracyError(NumericalError):
    pass


class AuditFailure(NumericalError):
    def __init__(self, message: str, report: object | None = None):
        super().__init__(message)
        self.report = report


def exit_status(exc: BaseException) -> int:
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    raise exc
