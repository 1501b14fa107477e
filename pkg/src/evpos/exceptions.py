"""Exception hierarchy shared by all analysis modules."""


class EvposError(Exception):
    """Base class for all evpos errors."""


class NonSquare(EvposError):
    """A square matrix was required."""


class DimensionMismatch(EvposError):
    """Operand shapes are inconsistent."""


class NotDiagonalizable(EvposError):
    """Eigenvector basis too ill-conditioned to trust the modal expansion."""


class Overflow(EvposError):
    """A computed matrix exceeded the floating-point range."""


class NotHurwitz(EvposError):
    """All eigenvalues were required to have negative real part."""


class SingularSystem(EvposError):
    """A linear system of equations is numerically singular."""


class UnboundedWitness(EvposError):
    """The feasibility margin objective is unbounded."""


class NotApplicable(EvposError):
    """The operation does not apply to this verdict class."""


class PreconditionFailed(EvposError):
    """A spectral or structural hypothesis required by the operation fails."""


class NotMetzler(EvposError):
    """A Metzler matrix was required."""


class NotStable(EvposError):
    """Asymptotic stability was required."""


class DegenerateW(EvposError):
    """The supplied left eigenvector is numerically zero."""


class NotSiso(EvposError):
    """A single-input or single-output system was required."""


class NotInternallyEventuallyPositive(EvposError):
    """Internal eventual positivity of the realization was required."""


class InvalidDirection(EvposError):
    """The dominant left eigenvector is orthogonal or opposed to the input map."""


class PremiseFailed(EvposError):
    """The corollary premise (internal eventual positivity) fails."""


class SchemaError(EvposError):
    """A model document violates the input schema."""
