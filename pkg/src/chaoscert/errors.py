"""Exception types shared across the package.

Each rejection rule of the domain operations has its own class so callers
(and the CLI) can name the failed rule without parsing messages.
"""


class ChaosCertError(Exception):
    """Base class for all package errors."""


# transition-matrix validation
class MatrixError(ChaosCertError, ValueError):
    rule = "invalid"


class TooSmallError(MatrixError):
    rule = "too-small"


class NonBinaryEntryError(MatrixError):
    rule = "non-binary-entry"


class ZeroRowError(MatrixError):
    rule = "zero-row"


class ZeroColumnError(MatrixError):
    rule = "zero-column"


class LengthZeroError(ChaosCertError, ValueError):
    """Word length must be at least 1."""


class NotFoundError(ChaosCertError, LookupError):
    """A word gadget the standing hypotheses guarantee was not found.

    Raised defensively: with an irreducible matrix that has a row summing
    to two or more, the searches cannot fail within their scan bounds.
    """


# symbol sequences
class ShiftPastEndError(ChaosCertError, IndexError):
    pass


class SymbolOutOfRangeError(ChaosCertError, ValueError):
    pass


class ZeroPowerError(ChaosCertError, ValueError):
    pass


class IndexPastEndError(ChaosCertError, IndexError):
    pass


class CapExceededError(ChaosCertError, RuntimeError):
    """Materialization would exceed the configured symbol cap.

    Signals that the caller must use the closed-form counting paths
    instead of expanding symbols.
    """


# schedule construction
class NotRecurrentError(ChaosCertError, RuntimeError):
    """The leading symbol did not recur within the scan budget."""


class NonRecurrentAlphaError(NotRecurrentError):
    pass


class InsufficientParameterError(ChaosCertError, ValueError):
    """The binary parameter sequence is too short for the requested schedule."""


class NonAdmissibleGadgetError(ChaosCertError, ValueError):
    pass


class PeriodMismatchError(ChaosCertError, ValueError):
    pass


class PeriodRequiredError(ChaosCertError, ValueError):
    """The periodic-orbit construction needs a periodic symbol sequence."""


# piecewise maps
class OutOfDomainError(ChaosCertError, ValueError):
    pass


class NonAdmissibleWordError(ChaosCertError, ValueError):
    pass


class EmptyCylinderError(ChaosCertError, RuntimeError):
    """An itinerary cylinder came out empty.

    Under a verified coupled-expansion certificate this cannot happen for
    admissible words; an empty result means a hypothesis was violated and
    is surfaced rather than silenced.
    """


class OrbitEscapedDomainError(ChaosCertError, RuntimeError):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


# distribution-function counting
class SkeletonMismatchError(ChaosCertError, ValueError):
    """The two schedules do not share a block skeleton."""
