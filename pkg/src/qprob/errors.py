"""Exception types shared across the package."""


class QprobError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(QprobError):
    """Operands live in different ambient dimensions."""


class NullConditioningError(QprobError):
    """Conditioning on an event of (numerically) zero probability."""


class InvalidContextError(QprobError):
    """A claimed context is not pairwise orthogonal or does not resolve identity."""


class IncompatibleEventError(QprobError):
    """Event is not compatible with a context member (projectors do not commute)."""


class DegenerateZError(QprobError):
    """Harmonic conjugation input z coincides with an endpoint x or y."""


class DegenerateUError(QprobError):
    """Harmonic conjugation auxiliary point u lies on the base line."""


class DegenerateVError(QprobError):
    """Harmonic conjugation auxiliary point v coincides with x or u."""


class NotCollinearError(QprobError):
    """Cross ratio of points that do not share a projective line."""


class CoincidentPointsError(QprobError):
    """Cross ratio with coincident points where distinct ones are required."""


class NonOrthogonalPairError(QprobError):
    """An orthogonal pair of rays was required."""


class UnknownAxiomError(QprobError):
    """Axiom identifier not recognised by the lattice checker."""


class CapExceededError(QprobError):
    """A documented size cap (element count, vertex count, sample budget) was hit."""


class GraphValidationError(QprobError):
    """Orthogonality graph inconsistent with its realization or malformed."""


class MissingRealizationError(QprobError):
    """Operation needs realized rays but the graph carries none."""


class InfeasibleError(QprobError):
    """Linear program infeasible; carries an exact certificate when available."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class UnboundedError(QprobError):
    """Objective unbounded; for box-constrained problems this flags an internal bug."""


class NotAWitnessError(QprobError):
    """Normalized operator has norm <= 1 and therefore witnesses nothing."""


class VanishingSeparableSupError(QprobError):
    """Separable supremum is numerically zero; normalization undefined."""


class InputFormatError(QprobError):
    """Malformed input file (CLI exit code 65)."""
