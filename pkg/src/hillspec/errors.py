"""Exception hierarchy shared by every module of the package."""


class HillSpecError(Exception):
    """Base class for all errors raised by hillspec."""


class InvalidTruncationError(HillSpecError, ValueError):
    pass


class ConvergenceError(HillSpecError):
    """An eigen-solve or iteration failed its residual / convergence test."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NoEigenvectorError(HillSpecError, ValueError):
    pass


class DegenerateLeadingCoefficientError(HillSpecError):
    """The first Fourier coefficient of an eigenvector vanished (a != 0)."""


class DivisionGuardError(HillSpecError, ZeroDivisionError):
    pass


class StiffnessError(HillSpecError):
    """The integrator could not reach its error target within the step budget."""


class PreconditionError(HillSpecError, ValueError):
    pass


class LocalizationError(HillSpecError):
    """Root isolation failed; ``rectangle`` is the offending sub-box."""

    def __init__(self, message, rectangle=None):
        super().__init__(message)
        self.rectangle = rectangle


class RadiusRefinementError(HillSpecError):
    pass


class InconsistentClassificationError(HillSpecError):
    pass


class CrossValidationError(HillSpecError):
    def __init__(self, message, orphans=(), report=None):
        super().__init__(message)
        self.orphans = list(orphans)
        self.report = report


class ContainmentViolation(HillSpecError):
    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = list(points)


class DegenerateParameterError(HillSpecError, ValueError):
    pass


class DependencyError(HillSpecError):
    """A chain certificate was requested before its estimations were verified."""
