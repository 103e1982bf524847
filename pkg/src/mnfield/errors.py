"""Exception types shared by every layer of the engine."""


class MNError(Exception):
    """Base class for engine errors."""


class InvalidPrime(MNError, ValueError):
    pass


class DomainError(MNError, ValueError):
    pass


class PrecisionError(MNError):
    """The truncation order is too low to decide the requested quantity."""


class IndeterminateValuation(PrecisionError):
    pass


class OutOfWindow(PrecisionError):
    pass


class NotInvertible(MNError, ArithmeticError):
    pass


class CertificationFailed(MNError):
    pass


class ResidueRootMissing(MNError):
    """A residue polynomial has no root in the working residue field."""
