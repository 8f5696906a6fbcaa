"""Scalar structure functions: F_a, Y_mn, g^(k), g_mn and the tilde-Y functions.

Everything here is built from :func:`ellipticdva.rmatrix.scalar_U`, which
depends on q alone; the elliptic nome enters only through the shift carrier
``s`` (or ``s_star``).  These functions therefore do not require |p| < 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotOnSurface, PoleProximity, SeriesDiverges, WrongRank
from .params import ModelParams
from .rmatrix import _guard, scalar_U, scalar_U_many, tau_N
from .theta import DEFAULT_TRUNCATION, SAFETY, Truncation, qpochhammer, theta_big

SURFACE_TOL = 1e-9


@dataclass(frozen=True)
class SurfaceSpec:
    """Integer pair (m, n) labelling the surface s^m s*^n = q^-N."""

    m: int
    n: int

    def __post_init__(self):
        if self.m == 0 and self.n == 0:
            raise ValueError("(m, n) = (0, 0) is not a surface")

    def residual(self, params: ModelParams) -> float:
        """|s^m s*^n q^N - 1|."""
        v = params.s ** self.m * params.s_star ** self.n * params.q ** params.N
        return abs(v - 1.0)

    def holds(self, params: ModelParams, tol=SURFACE_TOL) -> bool:
        return self.residual(params) <= tol

    def require(self, params: ModelParams, tol=SURFACE_TOL):
        r = self.residual(params)
        if not r <= tol:
            raise NotOnSurface(f"not on surface S_({self.m},{self.n}): residual {r:.3g}")


def _shift(params, starred):
    return params.s_star if starred else params.s


def calF(a, x, starred=False, params: ModelParams = None, trunc: Truncation = DEFAULT_TRUNCATION):
    """F_a(x): prod_{k<a} U(s^k x) for a > 0, 1 for a = 0, 1/prod_{k=1}^{|a|} U(s^-k x) for a < 0."""
    a = int(a)
    x = complex(x)
    s = _shift(params, starred)
    if a == 0:
        return 1.0 + 0j
    if a > 0:
        out = 1.0 + 0j
        for k in range(a):
            out *= scalar_U(params, s ** k * x, trunc)
        return out
    out = 1.0 + 0j
    for k in range(1, -a + 1):
        out *= scalar_U(params, s ** (-k) * x, trunc)
    return 1.0 / _guard(out, trunc, "F denominator")


def calF_theta(m, x, params: ModelParams, trunc: Truncation = DEFAULT_TRUNCATION, starred=False):
    """F_m through Theta_{q^2N} quotients with the shifts written as powers of p."""
    m = int(m)
    x = complex(x)
    N, q = params.N, params.q
    p = params.p_star if starred else params.p
    Q = q ** (2 * N)
    x2 = x * x

    def th(z):
        return theta_big(z, Q, trunc)

    if m == 0:
        return 1.0 + 0j
    if m > 0:
        out = params.q_power(m * (2.0 / N - 2.0))
        for k in range(m):
            den = _guard(th(p ** k * x2) * th(p ** (-k) / x2), trunc, "Theta denominator")
            out *= th(q * q * p ** k * x2) * th(q * q * p ** (-k) / x2) / den
        return out
    M = -m
    out = params.q_power(-M * (2.0 / N - 2.0))
    for k in range(1, M + 1):
        den = _guard(th(q * q * p ** (-k) * x2) * th(q * q * p ** k / x2), trunc, "Theta denominator")
        out *= th(p ** (-k) * x2) * th(p ** k / x2) / den
    return out


def _y_arguments(spec: SurfaceSpec, params: ModelParams, x):
    """Numerator and denominator U-arguments of Y_mn with the common U(x) removed."""
    s, t = params.s, params.s_star
    M, Nn = abs(spec.m), abs(spec.n)
    num = [t ** k * x for k in range(Nn)] + [s ** (-k) * x for k in range(1, M + 1)]
    den = [t ** (-k) * x for k in range(1, Nn + 1)] + [s ** k * x for k in range(M)]
    if M and Nn:
        num = num[1:]
        den = den[:Nn] + den[Nn + 1:]
    return num, den


def calY(spec: SurfaceSpec, x, params: ModelParams, trunc: Truncation = DEFAULT_TRUNCATION,
         check_surface=True):
    """Y_mn(x) = F*_n F*_-n / (F_m F_-m).

    The factor U(x) common to numerator and denominator is cancelled
    symbolically, so x = 1 is a regular point.
    """
    if check_surface:
        spec.require(params)
    x = complex(x)
    num, den = _y_arguments(spec, params, x)
    u = scalar_U_many(params, num + den, trunc)
    top = complex(np.prod(u[:len(num)]))
    bottom = complex(np.prod(u[len(num):]))
    return top / _guard(bottom, trunc, "Y denominator")


def exchange_mixed(m, n, r, x, params: ModelParams, trunc: Truncation = DEFAULT_TRUNCATION):
    """Exchange function between t_mn and t*_{-n,-m} shifted by s*^r:
    F*_n(x) F_-m(s*^r x) / (F_-m(x) F*_n(s*^r x))."""
    y = params.s_star ** int(r) * complex(x)
    return (calF(n, x, True, params, trunc) * calF(-m, y, False, params, trunc)
            / (calF(-m, x, False, params, trunc) * calF(n, y, True, params, trunc)))


# --- g functions ---------------------------------------------------------------

def g_series_log(k, z, p, q, tol=DEFAULT_TRUNCATION.target_tol, max_terms=100000):
    """log g^(k)(z) = sum_l (1-p^-kl)(1-(p^k q^2)^l)/(1+q^2l) z^l/l.

    Returns (value, L) where L terms were summed.  Each term is bounded by
    4 r^l / (l d) with r = |z| max(1,|p|^-k) max(1,|p^k q^2|); the cutoff makes
    that majorant's tail smaller than tol/10.
    """
    z, p, q = complex(z), complex(p), complex(q)
    if z == 0:
        return 0j, 0
    lp, lq = cmath.log(p), cmath.log(q)
    r = abs(z) * max(1.0, abs(p) ** (-k)) * max(1.0, abs(p ** k * q * q))
    if not r < 1.0:
        raise SeriesDiverges(
            f"series for g^({k}) needs |z| max(1,|p|^-k) max(1,|p^k q^2|) < 1, got {r:.6g}"
        )
    if abs(q) < 1.0:
        d = 1.0 - abs(q) ** 2
    elif q.imag == 0.0 and q.real > 0.0:
        d = 1.0
    else:
        d = None
    L = 1
    while True:
        dd = d if d is not None else max(abs(q) ** (2 * (L + 1)) - 1.0, 1e-300)
        if 4.0 * r ** (L + 1) / ((L + 1) * (1.0 - r) * dd) < tol / SAFETY:
            break
        L += 1
        if L > max_terms:
            raise SeriesDiverges(f"g^({k}) series needs more than {max_terms} terms")
    l = np.arange(1, L + 1)
    # summed in log-magnitude form: the individual factors overflow long before the terms do
    logs = (l * cmath.log(z) + _log_one_minus_exp(-k * l * lp)
            + _log_one_minus_exp(l * (k * lp + 2 * lq)) - _log_one_plus_exp(2 * l * lq))
    return complex(np.sum(np.exp(logs) / l)), L


def _log_one_minus_exp(x):
    """log(1 - e^x), accurate near x = 0 and finite for large Re x."""
    x = np.asarray(x, dtype=complex)
    big = x.real > 0
    out = np.empty_like(x)
    with np.errstate(divide="ignore"):  # exact zeros give log 0 = -inf, i.e. a vanishing term
        out[~big] = np.log(-np.expm1(x[~big]))
    out[big] = x[big] + 1j * math.pi + np.log(-np.expm1(-x[big]))
    return out


def _log_one_plus_exp(y):
    y = np.asarray(y, dtype=complex)
    big = y.real > 0
    out = np.empty_like(y)
    out[~big] = np.log1p(np.exp(y[~big]))
    out[big] = y[big] + np.log1p(np.exp(-y[big]))
    return out


def g_product(k, z, p, q, trunc: Truncation = DEFAULT_TRUNCATION, reduced=False):
    """(1-z)/(1-p^k z) (p^k z;q^4)(q^2 p^-k z;q^4) / ((p^-k z;q^4)(q^2 p^k z;q^4)).

    ``reduced=True`` drops the factor (1-z), which is regular at z = 1.
    """
    z, p, q = complex(z), complex(p), complex(q)
    Q = q ** 4
    pk = p ** k
    den = (1.0 - pk * z) * qpochhammer(z / pk, [Q], trunc) * qpochhammer(q * q * pk * z, [Q], trunc)
    _guard(den, trunc, "g product denominator")
    num = qpochhammer(pk * z, [Q], trunc) * qpochhammer(q * q * z / pk, [Q], trunc)
    return num / den if reduced else (1.0 - z) * num / den


def g_k(k, z, starred=False, params: ModelParams = None, trunc: Truncation = DEFAULT_TRUNCATION,
        form="product"):
    """g^(k)(z) (or g*^(k) with p -> p*) in the requested representation."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    p = params.p_star if starred else params.p
    if form == "series":
        return cmath.exp(g_series_log(k, z, p, params.q, trunc.target_tol)[0])
    if form == "product":
        return g_product(k, z, p, params.q, trunc)
    raise ValueError(f"unknown form {form!r}")


def _g_zero_order(spec: SurfaceSpec) -> int:
    """Power of (1-z) carried by g_mn."""
    M, Nn = abs(spec.m), abs(spec.n)
    return (M > 0) - (Nn > 0) + 2 * max(M - 1, 0) - 2 * max(Nn - 1, 0)


def g_mn(spec: SurfaceSpec, z, params: ModelParams, trunc: Truncation = DEFAULT_TRUNCATION,
         form="product", reduced=False):
    """g_corr(z) (prod_{k<|m|} g^(k))^2 (prod_{k<|n|} g*^(k))^-2 with g_corr = g^(|m|)/g*^(|n|).

    ``reduced=True`` (product form) divides out (1-z)^order.
    """
    M, Nn = abs(spec.m), abs(spec.n)

    def g(k, starred):
        if k == 0:
            return 1.0 + 0j
        if reduced:
            return g_product(k, z, params.p_star if starred else params.p, params.q, trunc, reduced=True)
        return g_k(k, z, starred, params, trunc, form)

    out = g(M, False) / g(Nn, True)
    for k in range(1, M):
        out *= g(k, False) ** 2
    for k in range(1, Nn):
        out /= g(k, True) ** 2
    return out


def calY_factored(spec: SurfaceSpec, x, params: ModelParams, trunc: Truncation = DEFAULT_TRUNCATION,
                  form="product"):
    """N = 2 factorization g_mn(x^2)/g_mn(x^-2)."""
    if params.N != 2:
        raise WrongRank("the g-factorization holds for N = 2 only")
    spec.require(params)
    x = complex(x)
    if form == "product":
        # (1-x^2)/(1-x^-2) = -x^2, so x = +-1 is a regular point
        den = _guard(g_mn(spec, x ** -2, params, trunc, reduced=True), trunc, "g_mn(x^-2)")
        return (-x * x) ** _g_zero_order(spec) * g_mn(spec, x * x, params, trunc, reduced=True) / den
    den = _guard(g_mn(spec, x ** -2, params, trunc, form), trunc, "g_mn(x^-2)")
    return g_mn(spec, x * x, params, trunc, form) / den


def _tau2(params, z, trunc):
    return tau_N(params, z, trunc)


def tildeY(m_or_n, x, starred=False, params: ModelParams = None, trunc: Truncation = DEFAULT_TRUNCATION):
    """tau_2-dressed structure functions.

    Unstarred, on S_(m,-1):
        tau2(q^(1/2-c) x) tau2(q^(1/2)/x) / (tau2(q^(1/2) x) tau2(q^(1/2-c)/x)) Y_(m,-1)(x).
    Starred, on S_(-1,n):
        tau2(q^(1/2+c)/x) tau2(q^(1/2) x) / (tau2(q^(1/2)/x) tau2(q^(1/2+c) x)) Y_(-1,n)(x).
    """
    if params.N != 2:
        raise WrongRank("tilde-Y is defined for N = 2")
    x = complex(x)
    c = float(params.c)
    h = params.q_power(0.5)
    if starred:
        spec = SurfaceSpec(-1, int(m_or_n))
        hc = params.q_power(0.5 + c)
        pre = (_tau2(params, hc / x, trunc) * _tau2(params, h * x, trunc)
               / (_tau2(params, h / x, trunc) * _tau2(params, hc * x, trunc)))
    else:
        spec = SurfaceSpec(int(m_or_n), -1)
        hc = params.q_power(0.5 - c)
        pre = (_tau2(params, hc * x, trunc) * _tau2(params, h / x, trunc)
               / (_tau2(params, h * x, trunc) * _tau2(params, hc / x, trunc)))
    return pre * calY(spec, x, params, trunc)


def dva_ratio(x, params: ModelParams, trunc: Truncation = DEFAULT_TRUNCATION, starred=False):
    """g^(1)(x^2)/g^(1)(x^-2) with g^(1) in product form."""
    x = complex(x)
    return (g_k(1, x * x, starred, params, trunc) / g_k(1, x ** -2, starred, params, trunc))


def g1_coefficients(L, p, q):
    """Coefficients of z^l/l in log g^(1): (1-p^-l)(1-(p q^2)^l)/(1+q^2l), l = 1..L."""
    l = np.arange(1, L + 1)
    p, q = complex(p), complex(q)
    return (1 - p ** (-l)) * (1 - (p * q * q) ** l) / (1 + q ** (2 * l))


def qpt_coefficients(L, Q, P, t):
    """The same coefficients in (Q, P, t) variables: (1-Q^l)(1-t^-l)/(1+P^l)."""
    l = np.arange(1, L + 1)
    Q, P, t = complex(Q), complex(P), complex(t)
    return (1 - Q ** l) * (1 - t ** (-l)) / (1 + P ** l)


def qpt_from_params(params: ModelParams):
    """Q = 1/p, P = q^2, t = 1/(p q^2)."""
    p, q = params.p, params.q
    return 1.0 / p, q * q, 1.0 / (p * q * q)
