"""Exception hierarchy shared by every module."""


class EllipticError(ValueError):
    """Base class for all numerical and precondition failures."""


class NomeOutOfDisk(EllipticError):
    """A nome has modulus >= 1, so the products do not converge."""


class TruncationInsufficient(EllipticError):
    """The certified tail bound fails for the requested truncation."""


class ZeroArgument(EllipticError):
    """A theta function was asked for z = 0."""


class TauNotInUpperHalfPlane(EllipticError):
    """Im(tau) <= 0."""


class PoleProximity(EllipticError):
    """A denominator is too close to zero for a meaningful evaluation."""


class WrongRank(EllipticError):
    """The operation is only defined for a specific N."""


class NotOnSurface(EllipticError):
    """The parameters violate s^m s*^n = q^-N."""


class SeriesDiverges(EllipticError):
    """A series form was requested outside its disk of convergence."""


class InconsistentSurface(EllipticError):
    """m + n = 0 but c is not the value forced by the surface."""


class BothZero(EllipticError):
    """Bezout data requested for (0, 0)."""


class InvalidM(EllipticError):
    """m is even or |m| = 1 where an odd |m| > 1 is required."""


class ExtrapolationUnstable(EllipticError):
    """Successive Richardson estimates disagree beyond tolerance."""
