"""Certified q-products, the Jacobi Theta function and theta functions with
rational characteristics.

Conventions used throughout the package: ``z = exp(i*pi*xi)``,
``p = exp(2*i*pi*tau)``, and every complex power is taken on the principal
branch of the logarithm (cut along the negative real axis).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .errors import (
    NomeOutOfDisk,
    TauNotInUpperHalfPlane,
    TruncationInsufficient,
    ZeroArgument,
)

SAFETY = 10.0


@dataclass(frozen=True)
class Truncation:
    """Cutoffs for products and series together with the target tolerance.

    Attributes:
        product_order: number of factors kept per geometric direction.
        series_order: characteristic series are summed over |m| <= series_order.
        target_tol: absolute/relative accuracy every certified value must meet.
    """

    product_order: int = 48
    series_order: int = 32
    target_tol: float = 1e-11

    def __post_init__(self):
        if int(self.product_order) != self.product_order or self.product_order < 1:
            raise ValueError("product_order must be a positive integer")
        if int(self.series_order) != self.series_order or self.series_order < 1:
            raise ValueError("series_order must be a positive integer")
        if not 0.0 < self.target_tol < 1.0:
            raise ValueError("target_tol must lie in (0, 1)")

    @property
    def pole_threshold(self) -> float:
        return 1e3 * self.target_tol

    def tail_bound(self, r, scale=1.0) -> float:
        """Geometric majorant of the relative error from dropping factors n >= M."""
        a = abs(r)
        if a >= 1.0:
            raise NomeOutOfDisk(f"nome modulus {a:.6g} >= 1")
        return scale * a ** self.product_order / (1.0 - a)

    def certify_nome(self, r, scale=1.0):
        """Raise unless the truncated product in direction ``r`` meets the target."""
        bound = self.tail_bound(r, scale)
        if not bound < self.target_tol / SAFETY:
            raise TruncationInsufficient(
                f"tail bound {bound:.3g} for |nome|={abs(r):.6g} at order "
                f"{self.product_order} exceeds {self.target_tol / SAFETY:.3g}"
            )

    def doubled(self) -> "Truncation":
        return replace(self, product_order=2 * self.product_order,
                       series_order=2 * self.series_order)

    def widened_for(self, *nomes, scale=4.0) -> "Truncation":
        """Smallest extension of this policy whose tail bound covers ``nomes``."""
        order = self.product_order
        for r in nomes:
            a = abs(r)
            if a >= 1.0:
                raise NomeOutOfDisk(f"nome modulus {a:.6g} >= 1")
            if a == 0.0:
                continue
            need = math.log(self.target_tol / SAFETY * (1.0 - a) / scale) / math.log(a)
            order = max(order, int(math.ceil(need)) + 1)
        return replace(self, product_order=order)


DEFAULT_TRUNCATION = Truncation()


@dataclass(frozen=True)
class Characteristics:
    """Rational characteristics (gamma1, gamma2), always in lowest terms."""

    gamma1: Fraction
    gamma2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "gamma1", Fraction(self.gamma1))
        object.__setattr__(self, "gamma2", Fraction(self.gamma2))

    def shifted(self, l1=0, l2=0) -> "Characteristics":
        return Characteristics(self.gamma1 + l1, self.gamma2 + l2)

    def fits_level(self, N) -> bool:
        """True when both denominators divide 2N (the weights use 1/2 + a/N)."""
        return (2 * N) % self.gamma1.denominator == 0 and (2 * N) % self.gamma2.denominator == 0


HALF = Characteristics(Fraction(1, 2), Fraction(1, 2))


def qpochhammer(z, nomes, trunc: Truncation = DEFAULT_TRUNCATION) -> complex:
    """Truncated multiple product prod (1 - z p1^n1 ... pk^nk), 0 <= n_i < M.

    The tail in each direction is certified relative to ``max(1, |z|)`` times
    the growth of the remaining directions.
    """
    nomes = [complex(r) for r in nomes]
    if not nomes:
        raise ValueError("at least one nome is required")
    z = complex(z)
    moduli = [abs(r) for r in nomes]
    for a in moduli:
        if a >= 1.0:
            raise NomeOutOfDisk(f"nome modulus {a:.6g} >= 1")
    scale = max(1.0, abs(z))
    for i, r in enumerate(nomes):
        others = 1.0
        for j, a in enumerate(moduli):
            if j != i:
                others /= 1.0 - a
        trunc.certify_nome(r, scale * others)
    n = np.arange(trunc.product_order)
    grid = np.ones(1, dtype=complex)
    for r in nomes:
        grid = np.multiply.outer(grid, r ** n).ravel()
    return complex(np.prod(1.0 - z * grid))


def theta_big(z, p, trunc: Truncation = DEFAULT_TRUNCATION) -> complex:
    """Theta_p(z) = (z;p)(p/z;p)(p;p)."""
    z = complex(z)
    p = complex(p)
    if z == 0:
        raise ZeroArgument("Theta_p(z) requires z != 0")
    if abs(p) >= 1.0:
        raise NomeOutOfDisk(f"|p| = {abs(p):.6g} >= 1")
    if p == 0:
        return 1.0 - z
    return qpochhammer(z, [p], trunc) * qpochhammer(p / z, [p], trunc) * qpochhammer(p, [p], trunc)


def theta_big_many(zs, p, trunc: Truncation = DEFAULT_TRUNCATION) -> np.ndarray:
    """Vectorized :func:`theta_big` over an array of arguments (same certification)."""
    zs = np.asarray(zs, dtype=complex).ravel()
    p = complex(p)
    if np.any(zs == 0):
        raise ZeroArgument("Theta_p(z) requires z != 0")
    if abs(p) >= 1.0:
        raise NomeOutOfDisk(f"|p| = {abs(p):.6g} >= 1")
    if p == 0:
        return 1.0 - zs
    scale = max(1.0, float(np.max(np.abs(zs))), float(np.max(np.abs(p / zs))))
    trunc.certify_nome(p, scale)
    pn = p ** np.arange(trunc.product_order)
    left = np.prod(1.0 - np.outer(zs, pn), axis=1)
    right = np.prod(1.0 - np.outer(p / zs, pn), axis=1)
    return left * right * np.prod(1.0 - p * pn)


def _check_tau(tau):
    tau = complex(tau)
    if not tau.imag > 0.0:
        raise TauNotInUpperHalfPlane(f"Im(tau) = {tau.imag:.6g} must be positive")
    return tau


def _series_tail(t_edge, step, a, b):
    """Bound on sum_{j>=0} exp(E(t_edge + j*step)) with E(t) = -a t^2 - b t.

    Returns inf when the terms are not yet decreasing at the edge.
    """
    e0 = -a * t_edge * t_edge - b * t_edge
    t1 = t_edge + step
    d = -a * t1 * t1 - b * t1 - e0
    if d >= 0.0:
        return math.inf, e0
    # E is concave, so the ratio of successive terms keeps shrinking outward
    return 1.0 / (1.0 - math.exp(d)), e0


def theta_char(ch: Characteristics, xi, tau, trunc: Truncation = DEFAULT_TRUNCATION) -> complex:
    """Theta with characteristics: sum_m exp(i pi (m+g1)^2 tau + 2 i pi (m+g1)(xi+g2)).

    The Gaussian decay of the summand certifies the truncation at
    |m| <= series_order relative to the largest kept term.
    """
    tau = _check_tau(tau)
    xi = complex(xi)
    g1 = float(ch.gamma1)
    g2 = float(ch.gamma2)
    M = trunc.series_order
    t = np.arange(-M, M + 1) + g1
    expo = 1j * math.pi * t * t * tau + 2j * math.pi * t * (xi + g2)
    peak = float(np.max(expo.real))
    a = math.pi * tau.imag
    b = 2.0 * math.pi * xi.imag
    tail = 0.0
    for edge, step in ((M + 1 + g1, 1.0), (-M - 1 + g1, -1.0)):
        factor, e_edge = _series_tail(edge, step, a, b)
        if math.isinf(factor):
            raise TruncationInsufficient(
                f"characteristic series not decaying at |m| = {M + 1}; raise series_order"
            )
        tail += factor * math.exp(e_edge - peak)
    if not tail < trunc.target_tol / SAFETY:
        raise TruncationInsufficient(
            f"characteristic series tail {tail:.3g} exceeds {trunc.target_tol / SAFETY:.3g}"
        )
    return complex(np.exp(peak) * np.sum(np.exp(expo - peak)))


def theta_char_product(ch: Characteristics, xi, tau, trunc: Truncation = DEFAULT_TRUNCATION) -> complex:
    """The same function through the product Theta_p, p = exp(2 i pi tau).

    Uses (-1)^(2 g1 g2) p^(g1^2/2) z^(2 g1) Theta_p(-exp(2 i pi g2) p^(g1+1/2) z^2)
    with every power written as an exponential in (xi, tau).
    """
    tau = _check_tau(tau)
    xi = complex(xi)
    g1 = ch.gamma1
    g2 = ch.gamma2
    ipi = 1j * math.pi
    pref = cmath.exp(2 * ipi * float(g1 * g2) + ipi * float(g1 * g1) * tau + 2 * ipi * float(g1) * xi)
    arg = -cmath.exp(2 * ipi * float(g2) + 2 * ipi * tau * (float(g1) + 0.5) + 2 * ipi * xi)
    p = cmath.exp(2 * ipi * tau)
    return pref * theta_big(arg, p, trunc)
