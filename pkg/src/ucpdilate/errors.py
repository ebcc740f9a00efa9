"""Exception types shared across the package."""


class UcpDilateError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(UcpDilateError):
    """Operands have incompatible shapes."""


class NotHermitian(UcpDilateError):
    """A matrix required to be Hermitian is not, beyond tolerance."""


class NotCompletelyPositive(UcpDilateError):
    """A Choi matrix has an eigenvalue below the negativity tolerance."""


class NoPositiveFixedPoint(UcpDilateError):
    """No positive-semidefinite, trace-one fixed point was found.

    Cannot occur for a valid ucp map; raised only on numerical breakage.
    """


class NonFaithfulState(UcpDilateError):
    """A faithful state was required but the density matrix is singular."""


class NotInvariant(UcpDilateError):
    """A state fails the invariance precondition for the given map."""


class NotInAlgebra(UcpDilateError):
    """An observable lies outside the declared subalgebra."""


class AlgebraNotInvariant(UcpDilateError):
    """The map does not send the declared subalgebra into itself."""


class DegenerateGram(UcpDilateError):
    """All Gram eigenvalues fell below the drop threshold."""


class NotInDomain(UcpDilateError):
    """Element is not in the multiplicative domain of the map."""


class BudgetExceeded(UcpDilateError):
    """Projected level dimensions exceed the configured memory budget."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class CapacityExceeded(UcpDilateError):
    """An operation would push support past the built level window."""


class AdjointAbsentError(UcpDilateError):
    """An operation requires a state-adjoint map that is unavailable."""
