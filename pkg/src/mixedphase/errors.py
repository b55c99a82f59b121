"""Exception types raised by mixedphase.

Every exception derives from :class:`MixedPhaseError`. Input validation
failures additionally derive from :class:`ValueError` so callers that only
care about bad input can catch that.
"""


class MixedPhaseError(Exception):
    """Base class for all library errors."""


class ValidationError(MixedPhaseError, ValueError):
    """Input does not satisfy a precondition."""


class DimensionMismatch(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class NotSpecialUnitary(NotUnitary):
    pass


class NotPositiveSemidefinite(ValidationError):
    pass


class NotADensityOperator(ValidationError):
    pass


class DegenerateSpectrum(ValidationError):
    pass


class NotIsospectral(ValidationError):
    pass


class NotUnitarilyConnected(ValidationError):
    pass


class InvalidSequence(ValidationError):
    pass


class SequenceNotMultiple(ValidationError):
    pass


class NotParallelTransporting(ValidationError):
    pass


class NotBlockStructured(ValidationError):
    pass


class MultiCycleUnsupported(NotBlockStructured):
    pass


class InsufficientSamples(ValidationError):
    pass


class ConvergenceFailure(MixedPhaseError):
    pass


class IndeterminatePhase(MixedPhaseError):
    """The trace defining a phase factor vanishes (a nodal point)."""
