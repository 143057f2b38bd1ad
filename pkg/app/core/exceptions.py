class SequenceParseError(ValueError):
    """Raised when a symbol string contains characters outside the alphabet."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class PolynomialParseError(ValueError):
    """Raised when a polynomial string is not in `1 - 2*t - t^3` form."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownFamily(ValueError):
    """Raised when a map family name or parameter is not recognised."""


class KneadingError(Exception):
    """Base class for structured domain errors."""


class DenominatorVanishesAtZero(KneadingError):
    """Raised when a rational function has no power series at t = 0."""


class DimensionMismatch(KneadingError):
    """Raised when matrix shapes are not conformable."""


class NotSquare(KneadingError):
    """Raised when a square matrix is required."""


class PeriodTooLarge(KneadingError):
    """Raised when enumeration is requested beyond the configured period bound."""


class NotAdmissible(KneadingError):
    """Raised when a periodic sequence fails the admissibility condition."""


class BistableInput(KneadingError):
    """Raised when a bistable sequence reaches the general determinant formula."""


class NotBistable(KneadingError):
    """Raised when the bistable determinant formula gets a non-bistable sequence."""


class InsufficientSymbols(KneadingError):
    """Raised when an itinerary is too short for the requested truncation order."""


class NonIntegerLapCoefficient(KneadingError):
    """Raised when the lap series of a determinant has a non-integer coefficient."""


class NotMarkovForm(KneadingError):
    """Raised when a sequence does not start with R, end with B and avoid A/B inside."""


class DuplicateItineraries(KneadingError):
    """Raised when the orbit table would contain two equal itineraries."""


class AtDiscontinuity(KneadingError):
    """Raised when a branch is evaluated exactly at c1 or c2."""


class OrbitEscapedDomain(KneadingError):
    """Raised when a numeric orbit leaves the interval (-a, a)."""


class BisectionFailure(KneadingError):
    """Raised when a breakpoint cannot be bracketed on a lap."""
