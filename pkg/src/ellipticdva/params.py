"""The parameter bundle (N, q, c) with the square-root carrier s = -p^(1/2)."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import NomeOutOfDisk


@dataclass(frozen=True)
class ModelParams:
    """Model parameters.

    ``s`` stands for -p^(1/2) and is never recomputed from p: the surfaces
    depend on that sign.  Derived quantities: ``p = s**2``,
    ``s_star = s*q**(-c)``, ``p_star = s_star**2``.

    Only ``0 < |q| < 1`` is enforced here.  Scalar structure functions see p
    solely through the shift ``s`` and make sense for any nonzero s; the
    matrix builders call :meth:`require_nomes` before touching p or p*.
    """

    N: int
    q: complex
    c: float
    s: complex

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("N must be an integer >= 2")
        object.__setattr__(self, "N", int(self.N))
        q = complex(self.q)
        if q == 0 or abs(q) >= 1.0:
            raise NomeOutOfDisk(f"q outside unit disk (|q| = {abs(q):.6g})")
        object.__setattr__(self, "q", q)
        if isinstance(self.c, complex):
            if self.c.imag != 0:
                raise ValueError("c must be real")
            object.__setattr__(self, "c", self.c.real)
        if not isinstance(self.c, Fraction):
            object.__setattr__(self, "c", float(self.c))
        s = complex(self.s)
        if s == 0:
            raise ValueError("s must be nonzero")
        object.__setattr__(self, "s", s)

    @classmethod
    def from_p(cls, N, q, c, p):
        """Take s = -sqrt(p) on the principal branch."""
        return cls(N, q, c, -cmath.sqrt(complex(p)))

    @property
    def log_q(self) -> complex:
        return cmath.log(self.q)

    def q_power(self, x) -> complex:
        """q**x on the principal branch."""
        return cmath.exp(complex(x) * self.log_q)

    @property
    def p(self) -> complex:
        return self.s * self.s

    @property
    def s_star(self) -> complex:
        return self.s * self.q_power(-float(self.c))

    @property
    def p_star(self) -> complex:
        return self.s_star * self.s_star

    @property
    def omega(self) -> complex:
        return cmath.exp(2j * math.pi / self.N)

    @property
    def log_s(self) -> complex:
        """A logarithm of s compatible with tau = Log(-s)/(i pi): Log(-s) + i pi."""
        return cmath.log(-self.s) + 1j * math.pi

    @property
    def tau(self) -> complex:
        return cmath.log(-self.s) / (1j * math.pi)

    @property
    def zeta(self) -> complex:
        return self.log_q / (1j * math.pi)

    def dual(self) -> "ModelParams":
        """Swap the roles of (s, p) and (s*, p*); c changes sign."""
        c = -self.c
        return ModelParams(self.N, self.q, c, self.s_star)

    @property
    def in_disk(self) -> bool:
        return abs(self.p) < 1.0 and abs(self.p_star) < 1.0

    def require_nomes(self):
        if not abs(self.p) < 1.0:
            raise NomeOutOfDisk(f"|p| = {abs(self.p):.6g} >= 1")
        if not abs(self.p_star) < 1.0:
            raise NomeOutOfDisk(f"|p*| = {abs(self.p_star):.6g} >= 1")

    def as_dict(self):
        c = self.c
        return {
            "N": self.N,
            "q": [self.q.real, self.q.imag],
            "c": str(c) if isinstance(c, Fraction) else c,
            "s": [self.s.real, self.s.imag],
        }
