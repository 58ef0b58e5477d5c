"""Exception types shared across the package.

Every failure mode that a caller is expected to handle gets its own class;
anything else is a plain ValueError (bad construction) or AssertionError
(broken internal theorem, never expected on valid inputs).
"""


class SelmerLabError(Exception):
    """Base class for all domain errors raised by this package."""


class LengthMismatch(SelmerLabError):
    """Rows or vectors of unequal length were mixed in one operation."""


class AmbientMismatch(SelmerLabError):
    """Subspaces or vectors from different ambient spaces were combined."""


class ProfileIncomplete(SelmerLabError):
    """A local-condition profile does not cover exactly the instance primes."""


class PrimeInProduct(SelmerLabError):
    """An auxiliary prime was required to be coprime to the product but divides it."""


class UnknownPrime(SelmerLabError):
    """A prime label does not belong to the instance."""


class PrimesExhausted(SelmerLabError):
    """The finite model ran out of fresh primes for a search that the
    infinite theory guarantees to succeed.  Signals the instance is too
    small for the requested argument, not a bug."""


class BoundExceeded(SelmerLabError):
    """An operation would need products with more prime factors than the
    configured support bound."""


class DualityViolation(SelmerLabError):
    """A duality identity that holds for every true Lagrangian failed;
    signals a corrupted instance."""


class ParityMismatch(SelmerLabError):
    """The instance parity bit is incompatible with its Selmer ranks, so no
    non-trivial bipartite system exists and construction refuses."""


class CeilingExceeded(SelmerLabError):
    """An exhaustive enumeration was requested beyond the configured ceiling."""
