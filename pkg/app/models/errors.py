class AvtaError(Exception):
    """Base class for every error raised by the package."""


class InvalidInputError(AvtaError, ValueError):
    """Bad parameters or data (non-finite coordinates, out-of-range epsilon, bad indices...)."""


class FormatError(InvalidInputError):
    """A point-set, system or metadata file could not be parsed."""


class IterationLimitError(AvtaError, RuntimeError):
    """The Triangle Algorithm exceeded its iteration ceiling."""

    def __init__(self, message: str, iterations: int):
        super().__init__(message)
        self.iterations = iterations


class DegeneratePivotError(AvtaError, RuntimeError):
    """A pivot was claimed at zero distance from the iterate, which means the cached state is corrupted."""


class UndefinedAngleError(AvtaError, ValueError):
    """Strict-pivot search was asked for while the iterate coincides with the query."""


class GammaFloorError(AvtaError, RuntimeError):
    """The gamma-halving search reached its floor without finding enough vertices."""

    def __init__(self, message: str, found: int, wanted: int):
        super().__init__(message)
        self.found = found
        self.wanted = wanted


class HypothesisViolationError(InvalidInputError):
    """The robust recovery was called outside the 4 * epsilon <= sigma <= 1 regime."""


class UndefinedCertificateError(AvtaError, ValueError):
    """A projection certificate was asked for a point that lies in the hull."""


class AnchorError(AvtaError, ValueError):
    """No anchor direction puts every column strictly on the positive side of the scaling hyperplane."""

    def __init__(self, message: str, hint: str = ""):
        super().__init__(message)
        self.hint = hint


__all__ = [
    "AvtaError",
    "InvalidInputError",
    "FormatError",
    "IterationLimitError",
    "DegeneratePivotError",
    "UndefinedAngleError",
    "GammaFloorError",
    "HypothesisViolationError",
    "UndefinedCertificateError",
    "AnchorError",
]
