"""Exception hierarchy shared by all modcover modules.

Every domain failure derives from DomainError so the CLI can map it to
exit code 1; usage problems are left to argparse (exit code 2).
"""


class DomainError(Exception):
    """Base class for all domain-level failures."""


class NotInSL2Z(DomainError):
    """Matrix is not integral with determinant 1."""


class NotElliptic(DomainError):
    """Operation requires an elliptic element (trace^2 < 4 det, non-central)."""


class NotImaginary(DomainError):
    """Quadratic form does not have negative discriminant."""


class BadDiscriminant(DomainError):
    """Integer is not a valid quadratic discriminant (must be <0 and 0,1 mod 4)."""


class BoundExceeded(DomainError):
    """Requested level or modulus is above the configured enumeration bound."""


class NotDivisor(DomainError):
    """Projection target level does not divide the source level."""


class BadModulus(DomainError):
    """A required denominator or diagonal part is not invertible mod the precision."""


class PrecisionMismatch(DomainError):
    """Operands carry different precision moduli."""


class Inconsistent(DomainError):
    """Rigidity constraint system has no solution; message names the first violated equation."""


class PrecisionInsufficient(DomainError):
    """Certified integer rounding failed even at the maximum working precision."""


class NotCM(DomainError):
    """Point is not a CM point.  Unreachable for quadratic points; kept for API symmetry."""
