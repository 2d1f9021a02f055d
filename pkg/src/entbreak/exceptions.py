"""Exception hierarchy for entbreak."""


class EntbreakError(Exception):
    """Base class for every error raised by this package."""


class InvalidState(EntbreakError, ValueError):
    """A matrix or vector violates a state invariant (hermiticity, trace, PSD, norm)."""


class NotHermitian(EntbreakError, ValueError):
    pass


class NotConverged(EntbreakError, ArithmeticError):
    pass


class NotUnitary(EntbreakError, ValueError):
    pass


class NotUnitaryBasis(NotUnitary):
    pass


class ParameterOutOfRange(EntbreakError, ValueError):
    pass


class DimensionMismatch(EntbreakError, ValueError):
    pass


class UnsupportedDimension(EntbreakError, ValueError):
    pass


class IncompleteChannel(EntbreakError, ValueError):
    """Kraus operators do not satisfy sum K^dagger K = I."""


class NoSignChange(EntbreakError, ArithmeticError):
    """The minimum partial-transpose eigenvalue never crosses zero on the domain.

    ``endpoints`` maps each domain endpoint to its (mu_min, verdict) pair.
    """

    def __init__(self, message, endpoints=None):
        super().__init__(message)
        self.endpoints = endpoints or {}


class CertificateFailure(EntbreakError):
    """A certificate piece did not verify.

    ``piece`` names the first failing piece, ``certificate`` holds the
    partially evaluated certificate for reporting.
    """

    def __init__(self, piece, certificate=None, message=None):
        super().__init__(message or f"certificate piece failed: {piece}")
        self.piece = piece
        self.certificate = certificate


class UnknownStateRef(EntbreakError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown state reference"
