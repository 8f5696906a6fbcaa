"""Scaling-limit coefficients and the Poisson structure functions f_l.

Scaling: p = 1 + eps, q = 1 + eta eps.  The second-order coefficient of
g^(k) - 1 is extracted by polynomial (Neville) extrapolation of
(g(eps) - 1)/eps^2 to eps = 0.  The expansion contains odd powers of eps, so
the extrapolation variable is eps itself.

Poisson: along p^(1-eps) = q^(alpha N l), i.e. s(eps) = q^(a/(1-eps)) with
a = alpha N l / 2, the bracket is f(x) = -d ln Y_mn(x)/d eps at eps = 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ExtrapolationUnstable, NotOnSurface, PoleProximity, SeriesDiverges
from .params import ModelParams
from .structfn import SurfaceSpec, calY, g_series_log
from .theta import DEFAULT_TRUNCATION, SAFETY, Truncation

DEFAULT_GRID = (1e-2, 5e-3, 2.5e-3, 1.25e-3)
M_UNIT_NORMALIZATION = -1.0
POISSON_TAGS = ("both_large", "n_unit_even", "n_unit_odd", "n_unit_divisor", "m_unit")


# --- extrapolation -----------------------------------------------------------------

def neville(hs, values):
    """Value at h = 0 of the interpolating polynomial through (hs, values).

    Returns (estimate, previous) where ``previous`` drops the coarsest point.
    """
    hs = [float(h) for h in hs]
    T = [complex(v) for v in values]
    n = len(T)
    prev = None
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            T[i] = T[i] + (T[i] - T[i - 1]) * hs[i] / (hs[i - j] - hs[i])
        if j == n - 2:
            prev = T[n - 1]
    return T[n - 1], prev


def _extrapolate(fn, grid, scale=1.0, rel_tol=1e-3, abs_tol=1e-6):
    # abs_tol * scale guards coefficients that vanish identically
    values = [fn(e) for e in grid]
    est, prev = neville(grid, values)
    if prev is not None and abs(est - prev) > max(rel_tol * abs(est), abs_tol * scale):
        raise ExtrapolationUnstable(f"extrapolated values {est} and {prev} disagree")
    return est


@dataclass(frozen=True)
class ScalingPoint:
    eta: float
    epsilon_grid: tuple = DEFAULT_GRID
    c: float = 0.0
    k: int | None = None
    m: int | None = None
    n: int | None = None

    def __post_init__(self):
        g = tuple(float(e) for e in self.epsilon_grid)
        if len(g) < 4:
            raise ValueError("epsilon grid needs at least 4 points")
        if any(not 0 < e < 0.1 for e in g) or any(b >= a for a, b in zip(g, g[1:])):
            raise ValueError("epsilon grid must be strictly decreasing inside (0, 0.1)")
        object.__setattr__(self, "epsilon_grid", g)


def _check_grid(grid):
    return ScalingPoint(1.0, tuple(grid)).epsilon_grid


def _scaled_p_q(eps, eta, c=0.0, starred=False):
    p = 1.0 + eps
    q = 1.0 + eta * eps
    if starred:
        p = p * q ** (-2.0 * c)
    return p, q


def scaling_closed_gk(k, eta, z, c=0.0, starred=False):
    """-k'(k'+2 eta)/2 z/(1-z)^2 with k' = k (1 - 2 eta c) when starred."""
    kk = k * (1 - 2 * eta * c) if starred else k
    z = complex(z)
    return -kk * (kk + 2 * eta) / 2 * z / (1 - z) ** 2


def scaling_coeff_gk(k, eta, z, grid=DEFAULT_GRID, c=0.0, starred=False):
    """Extrapolated lim (g^(k)(z) - 1)/eps^2."""
    z = complex(z)
    grid = _check_grid(grid)
    if abs(z) >= 1 or z == 1:
        raise SeriesDiverges("scaling coefficients need |z| < 1")
    if z == 0:
        return 0j

    def value(eps):
        p, q = _scaled_p_q(eps, eta, c, starred)
        return _expm1(g_series_log(k, z, p, q, 1e-15)[0]) / eps ** 2

    return _extrapolate(value, grid, abs(z / (1 - z) ** 2))


def _expm1(w):
    w = complex(w)
    if abs(w) < 1e-5:
        return w + w * w / 2 + w ** 3 / 6
    return cmath.exp(w) - 1.0


def beta_ell(l, eta):
    a = abs(l)
    return a * (a - 1) * (2 * a - 1) / 6 + eta * l * (l - 2)


def scaling_surface_c(m, n, eta):
    """c solving m + (1 - 2 eta c) n = -4 eta, the surface to first order in eps."""
    return (1 + (m + 4 * eta) / n) / (2 * eta)


def scaling_closed_gmn(m, n, c, eta, z):
    z = complex(z)
    a = 1 - 2 * eta * c
    coeff = beta_ell(m, eta) - a * a * beta_ell(n, eta) - 2 * eta * eta * c * a * n * (n - 2)
    return -coeff * z / (1 - z) ** 2


def _log_gmn(m, n, c, z, p, q):
    ps = p * q ** (-2.0 * c)

    def lg(k, pp):
        return 0j if k == 0 else g_series_log(k, z, pp, q, 1e-15)[0]

    M, Nn = abs(m), abs(n)
    out = lg(M, p) - lg(Nn, ps)
    out += 2 * sum(lg(k, p) for k in range(1, M))
    out -= 2 * sum(lg(k, ps) for k in range(1, Nn))
    return out


def scaling_coeff_gmn(m, n, c, eta, z, grid=DEFAULT_GRID, tol=1e-12):
    """Extrapolated eps^2 coefficient of g_mn; requires the first-order scaling surface."""
    z = complex(z)
    grid = _check_grid(grid)
    if n == 0 or abs(m + (1 - 2 * eta * c) * n + 4 * eta) > tol:
        raise NotOnSurface(f"(m, n, c) = ({m}, {n}, {c}) is off the scaling surface at eta = {eta}")
    if z == 0:
        return 0j
    return _extrapolate(lambda e: _expm1(_log_gmn(m, n, c, z, 1.0 + e, 1.0 + eta * e)) / e ** 2,
                        grid, abs(z / (1 - z) ** 2))


# --- Poisson -------------------------------------------------------------------------

def _ksup(big, small_sign_product):
    return abs(big) if small_sign_product > 0 else abs(big) - 1


@dataclass(frozen=True)
class PoissonCase:
    """Deformation data for one case of the Poisson theorem.

    ``ell`` is the deformation integer (``ell'`` for m_unit).  ``u`` selects the
    divisor variant.  Derived: alpha, k_sup, g, eta_sign, w, w_prime and the
    base exponents (a, a*) of (s, s*).
    """

    case_tag: str
    m: int
    n: int
    ell: int
    N: int = 2
    u: int | None = None
    alpha: Fraction = field(init=False)
    k_sup: int | None = field(init=False, default=None)
    g: int | None = field(init=False, default=None)
    eta_sign: int | None = field(init=False, default=None)
    w: int | None = field(init=False, default=None)
    w_prime: int | None = field(init=False, default=None)
    ell_prime: int | None = field(init=False, default=None)
    variant: str = field(init=False, default="")

    def __post_init__(self):
        tag, m, n, l, N = self.case_tag, int(self.m), int(self.n), int(self.ell), int(self.N)
        set_ = lambda k, v: object.__setattr__(self, k, v)
        if tag not in POISSON_TAGS:
            raise ValueError(f"unknown Poisson case {tag!r}")
        if l == 0:
            raise ValueError("ell must be nonzero")
        if tag == "both_large":
            if abs(m) < 2 or abs(n) < 2:
                raise ValueError("both_large needs |m|, |n| > 1")
            if m * n < 0:
                raise ValueError("both_large closed form is implemented for m n > 0")
            lam = -l if m > 0 else l
            lp = 1 - lam
            if lp == 0:
                raise ValueError("lambda' = 0 is excluded")
            set_("alpha", Fraction(2, abs(m)))
            set_("ell_prime", lp)
            set_("w", math.gcd(l, m))
            set_("w_prime", math.gcd(lp, n))
            set_("variant", "both")
            return
        if tag.startswith("n_unit"):
            if abs(n) != 1 or abs(m) < 2:
                raise ValueError("n_unit cases need |n| = 1, |m| > 1")
            big = m
        else:
            if abs(m) != 1 or abs(n) < 2:
                raise ValueError("m_unit needs |m| = 1, |n| > 1")
            big = n
        k_sup = _ksup(big, m * n)
        set_("k_sup", k_sup)
        if tag == "n_unit_divisor" or (tag == "m_unit" and self.u is not None):
            u = int(self.u or 0)
            if u < 1:
                raise ValueError("divisor case needs a positive u")
            if k_sup % u == 0:
                g, eta = k_sup // u, 1
            elif (k_sup + 1) % u == 0:
                g, eta = (k_sup + 1) // u, -1
            else:
                raise ValueError(f"u = {u} divides neither k_sup = {k_sup} nor k_sup + 1")
            set_("alpha", Fraction(2, u))
            set_("g", g)
            set_("eta_sign", eta)
            set_("w", math.gcd(l, u))
            set_("variant", "divisor")
            return
        if self.u is not None:
            raise ValueError("u is only used by the divisor variant")
        parity = "even" if l % 2 == 0 else "odd"
        if tag in ("n_unit_even", "n_unit_odd") and not tag.endswith(parity):
            raise ValueError(f"{tag} needs ell {tag.rsplit('_', 1)[1]}")
        set_("alpha", Fraction(1))
        set_("variant", parity)

    @property
    def spec(self) -> SurfaceSpec:
        return SurfaceSpec(self.m, self.n)

    @property
    def deforms_star(self) -> bool:
        return self.case_tag == "m_unit"

    def base_exponent(self) -> Fraction:
        """Exponent of s (or of s* for m_unit) at eps = 0: alpha N ell / 2."""
        return self.alpha * self.N * self.ell / 2

    def exponents(self, eps=0.0):
        """(a, a*) with s = q^a, s* = q^a* on S_mn, deformed by 1/(1-eps)."""
        b = float(self.base_exponent()) / (1.0 - eps)
        m, n, N = self.m, self.n, self.N
        if self.deforms_star:
            return (-N - n * b) / m, b
        return b, (-N - m * b) / n

    def params(self, q, eps=0.0) -> ModelParams:
        a, a_star = self.exponents(eps)
        q = complex(q)
        lq = cmath.log(q)
        return ModelParams(self.N, q, a - a_star, cmath.exp(a * lq))

    def as_dict(self):
        return {
            "case_tag": self.case_tag, "m": self.m, "n": self.n, "ell": self.ell, "N": self.N,
            "u": self.u, "alpha": str(self.alpha), "k_sup": self.k_sup, "g": self.g,
            "eta_sign": self.eta_sign, "w": self.w, "w_prime": self.w_prime,
            "ell_prime": self.ell_prime, "variant": self.variant,
        }


def lambert(x2, nome, start, trunc: Truncation = DEFAULT_TRUNCATION):
    """sum_{s >= start} x2 nome^s / (1 - x2 nome^s), tail certified geometrically."""
    x2, nome = complex(x2), complex(nome)
    r = abs(nome)
    if r >= 1.0:
        raise SeriesDiverges(f"|nome| = {r:.6g} >= 1")
    tol = trunc.target_tol / SAFETY
    S = start
    # first index where |x2 nome^S| <= 1/2, then enough terms for the tail
    while abs(x2) * r ** S > 0.5:
        S += 1
    extra = 0 if r == 0 else max(0, math.ceil(math.log(tol * (1 - r) / (2 * abs(x2) * r ** S + 1e-300)) / math.log(r)))
    s = np.arange(start, S + extra + 1)
    t = x2 * nome ** s
    den = 1.0 - t
    if np.min(np.abs(den)) < trunc.pole_threshold:
        raise PoleProximity("x^2 hits a pole of I(x)")
    return complex(np.sum(t / den))


def _half_term(x2, trunc):
    den = 1.0 - x2
    if abs(den) < trunc.pole_threshold:
        raise PoleProximity("x^2 = 1 is a pole of I(x)")
    return 0.5 * x2 / den


def poisson_prefactors(case: PoissonCase):
    """Integer weights of the Lambert sums in I(x) for the n_unit parity cases.

    even: k(k+1)/2; odd: floor(k/2)(floor(k/2)+1) and floor((k+1)/2)^2, k = k_sup.
    """
    k = case.k_sup
    if case.variant == "even":
        return (k * (k + 1) // 2,)
    if case.variant == "odd":
        h = k // 2
        return (h * (h + 1), ((k + 1) // 2) ** 2)
    raise ValueError(f"no parity prefactors for variant {case.variant!r}")


def poisson_I(case: PoissonCase, x, N=None, q=None, trunc: Truncation = DEFAULT_TRUNCATION):
    """I(x) for the given case; N defaults to case.N."""
    N = case.N if N is None else N
    q = complex(q)
    x2 = complex(x) ** 2
    if x2 == 0:
        return 0j
    P = q ** (2 * N)
    lq = cmath.log(q)

    def K():
        return lambert(x2, P, 1, trunc) + _half_term(x2, trunc)

    def nome(expo):
        return cmath.exp(expo * lq)

    if case.variant == "both":
        m, n = abs(case.m), abs(case.n)
        w, wp = case.w, case.w_prime
        return (w * lambert(x2, nome(2 * N * w / m), 1, trunc)
                + wp * lambert(x2, nome(2 * N * wp / n), 1, trunc)
                + (w + wp) * _half_term(x2, trunc))
    if case.variant == "even":
        (a,) = poisson_prefactors(case)
        return a * K()
    if case.variant == "odd":
        a, b = poisson_prefactors(case)
        return a * K() + b * lambert(x2 * q ** N, P, 0, trunc)
    g, eta, w, u = case.g, case.eta_sign, case.w, case.u
    inner = eta * lambert(x2, P, 1, trunc) + g * w * lambert(x2, nome(2 * N * w / u), 1, trunc)
    return g * (inner + (g * w + eta) * _half_term(x2, trunc))


def poisson_f(case: PoissonCase, x, N=None, q=None, trunc: Truncation = DEFAULT_TRUNCATION):
    """2 N l ln q (B(x) - B(1/x)), B(x) = 2 I(x) - I(qx) - I(x/q).

    The m_unit case carries the fitted overall factor M_UNIT_NORMALIZATION.
    """
    N = case.N if N is None else N
    q = complex(q)
    x = complex(x)
    if x * x == 1:
        # fixed points of x -> 1/x; the antisymmetric combination vanishes there
        return 0j

    def B(y):
        return (2 * poisson_I(case, y, N, q, trunc) - poisson_I(case, q * y, N, q, trunc)
                - poisson_I(case, y / q, N, q, trunc))

    f = 2 * N * case.ell * cmath.log(q) * (B(x) - B(1 / x))
    return M_UNIT_NORMALIZATION * f if case.deforms_star else f


def log_Y_along(case: PoissonCase, x, q, eps, trunc: Truncation = DEFAULT_TRUNCATION, spec=None):
    params = case.params(q, eps)
    return cmath.log(calY(spec or case.spec, x, params, trunc))


def poisson_fd_oracle(case: PoissonCase, x, N=None, q=None, epsilon=1e-4,
                      trunc: Truncation = DEFAULT_TRUNCATION, spec=None):
    """-(ln Y(x; eps) - ln Y(x; -eps)) / (2 eps) along the case's deformation."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if N is not None and N != case.N:
        raise ValueError("N disagrees with the case")
    spec = spec or case.spec
    if not spec.holds(case.params(q, 0.0)):
        raise NotOnSurface("base point is not on the surface")
    up = log_Y_along(case, x, q, epsilon, trunc, spec)
    down = log_Y_along(case, x, q, -epsilon, trunc, spec)
    return -(up - down) / (2 * epsilon)


def poisson_fd_extrapolated(case: PoissonCase, x, q, epsilon=1e-4,
                            trunc: Truncation = DEFAULT_TRUNCATION, spec=None):
    """Central differences at eps and eps/2 combined to cancel the eps^2 error term."""
    d1 = poisson_fd_oracle(case, x, case.N, q, epsilon, trunc, spec)
    d2 = poisson_fd_oracle(case, x, case.N, q, epsilon / 2, trunc, spec)
    return (4 * d2 - d1) / 3


def unnormalized_m_unit_ratio(case: PoissonCase, x, q, epsilon=1e-4, trunc=DEFAULT_TRUNCATION):
    """oracle / closed form without the fitted factor; should equal M_UNIT_NORMALIZATION."""
    closed = poisson_f(case, x, case.N, q, trunc) / M_UNIT_NORMALIZATION
    return poisson_fd_oracle(case, x, case.N, q, epsilon, trunc) / closed


def log_derivative_U(x, N, q, trunc: Truncation = DEFAULT_TRUNCATION):
    """x d ln U / dx = 2 (B(x) - B(1/x)) with the base-nome I(x) = sum_{s>=1} + half term."""
    q = complex(q)
    P = q ** (2 * N)

    def I(y):
        y2 = complex(y) ** 2
        return lambert(y2, P, 1, trunc) + _half_term(y2, trunc)

    def B(y):
        return 2 * I(y) - I(q * y) - I(y / q)

    x = complex(x)
    return 2 * (B(x) - B(1 / x))


def poisson_f_analytic(case: PoissonCase, x, q, trunc: Truncation = DEFAULT_TRUNCATION):
    """-d ln Y_mn / d eps from the chain rule through every U factor of Y_mn.

    Each factor U(q^e x) contributes ln q * de/deps * (x d ln U/dx)(q^e x).
    This is exact and independent of the case-by-case closed forms.
    """
    q = complex(q)
    lq = cmath.log(q)
    m, n, N = case.m, case.n, case.N
    a, a_star = case.exponents(0.0)
    if case.deforms_star:
        da_star = a_star
        da = -n * da_star / m
    else:
        da = a
        da_star = -m * da / n
    M, Nn = abs(m), abs(n)
    num = [(k * a_star, k * da_star) for k in range(1, Nn)] + [(-k * a, -k * da) for k in range(1, M + 1)]
    den = [(-k * a_star, -k * da_star) for k in range(1, Nn + 1)] + [(k * a, k * da) for k in range(1, M)]
    x = complex(x)
    total = 0j
    for sign, group in ((1, num), (-1, den)):
        for e, de in group:
            if de:
                total += sign * de * log_derivative_U(cmath.exp(e * lq) * x, N, q, trunc)
    return -lq * total


def fit_m_unit_normalization(case: PoissonCase, xs, q, trunc: Truncation = DEFAULT_TRUNCATION):
    """Least-squares constant k with oracle ~ k * (closed form without the factor).

    Returns (k, worst relative misfit).
    """
    if not case.deforms_star:
        raise ValueError("normalization fit applies to the m_unit case")
    bare = np.array([poisson_f(case, x, case.N, q, trunc) / M_UNIT_NORMALIZATION for x in xs])
    target = np.array([poisson_fd_extrapolated(case, x, q, trunc=trunc) for x in xs])
    k = complex(np.vdot(bare, target) / np.vdot(bare, bare))
    misfit = float(np.max(np.abs(target - k * bare)) / np.max(np.abs(target)))
    return k, misfit


def poisson_mismatch(closed, reference, rel_tol=1e-5, abs_floor=1e-8):
    """|closed - reference| / max(|reference|, abs_floor/rel_tol).

    Below rel_tol exactly when the relative error is below rel_tol, or, for
    references smaller than abs_floor/rel_tol (near zeros of f), when the
    absolute error is below abs_floor.
    """
    return abs(closed - reference) / max(abs(reference), abs_floor / rel_tol)
