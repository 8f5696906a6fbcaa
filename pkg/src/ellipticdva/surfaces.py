"""Surface solving, abelianity loci and the localized-center parameters.

Loci are computed in exact rational arithmetic: every parameter point is
encoded by the exponents of s = q^a and s* = q^a*, with c = a - a* and
m a + n a* = -N on the surface S_mn.  Floating point appears only when a
locus is instantiated for a concrete q.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import BothZero, InconsistentSurface, InvalidM, NomeOutOfDisk, PoleProximity
from .params import ModelParams
from .rmatrix import scalar_U_many
from .sampling import DEFAULT_SEED, log_annulus_points, make_rng
from .structfn import SurfaceSpec, calY
from .theta import DEFAULT_TRUNCATION

CASE_TAGS = ("generic", "n_unit", "m_unit", "antidiagonal", "localized_center")
MACHINE_SURFACE_TOL = 1e-13


# --- surface solving -------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceSolution:
    """Roots s of s^(m+n) = q^(n c - N), or a free family when m + n = 0."""

    spec: SurfaceSpec
    c: float
    roots: tuple = ()
    free_family: bool = False

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)


def solve_surface(spec: SurfaceSpec, q, c, N, tol=1e-12) -> SurfaceSolution:
    """All carriers s on S_mn for given (q, c).

    With s* = s q^-c the surface reads s^(m+n) = q^(n c - N).  When m + n = 0
    it only constrains c = N/n and leaves s free.
    """
    m, n = spec.m, spec.n
    q = complex(q)
    if m + n == 0:
        forced = Fraction(N, n)
        ok = (c == forced) if isinstance(c, Fraction) else abs(float(c) - float(forced)) <= tol
        if not ok:
            raise InconsistentSurface(f"m + n = 0 forces c = {forced}, got {c}")
        return SurfaceSolution(spec, c, (), True)
    k = m + n
    lq = cmath.log(q)
    base = cmath.exp((n * float(c) - N) / k * lq)
    roots = tuple(base * cmath.exp(2j * math.pi * j / abs(k)) for j in range(abs(k)))
    return SurfaceSolution(spec, c, roots, False)


def surface_identity_residual(spec: SurfaceSpec, params: ModelParams) -> float:
    """|s^m s*^n - q^-N| / |q^-N|."""
    return spec.residual(params)


# --- Bezout and permutations -----------------------------------------------------

@dataclass(frozen=True)
class BezoutData:
    a: int
    b: int
    gcd: int
    beta: int
    beta_prime: int

    def __post_init__(self):
        assert self.beta * self.a + self.beta_prime * self.b == self.gcd


def _ext_gcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        k, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    return a, x0, y0


def bezout(a, b) -> BezoutData:
    """beta a + beta' b = gcd(a, b) with 0 <= beta < |b|/gcd when b != 0."""
    a, b = int(a), int(b)
    if a == 0 and b == 0:
        raise BothZero("bezout(0, 0) is undefined")
    g, x, y = _ext_gcd(a, b)
    if g < 0:
        g, x, y = -g, -x, -y
    if b != 0:
        period = abs(b) // g
        x %= period
        y = (g - x * a) // b
    return BezoutData(a, b, g, x, y)


def sigma_values(m, beta):
    """sigma(k) = m + k(beta+1) reduced to 1..m, k = 1..m."""
    return [(m + k * (beta + 1) - 1) % m + 1 for k in range(1, m + 1)]


def permutation_span_check(m, lam) -> bool:
    """True iff sigma(k) = m + k(beta+1) runs over all of 1..m, (beta, beta') = bezout(lam, m).

    The map k -> k(beta+1) mod m is a bijection exactly when beta+1 is a unit
    mod m; that cycle criterion is what is evaluated here.
    """
    m, lam = int(m), int(lam)
    _check_localized_m(m)
    M = abs(m)
    beta = bezout(lam, M).beta
    return math.gcd(beta + 1, M) == 1


# --- loci --------------------------------------------------------------------------

@dataclass(frozen=True)
class AbelianLocus:
    """A rational parameter point on S_mn at which Y_mn is expected to be 1."""

    m: int
    n: int
    N: int
    case_tag: str
    c: Fraction
    lam: Fraction | None
    lam_prime: Fraction | None
    s_exponent: Fraction
    s_star_exponent: Fraction
    u: int | None = None
    free_family: bool = False
    beta: int | None = None

    def __post_init__(self):
        if self.case_tag not in CASE_TAGS:
            raise ValueError(f"unknown case tag {self.case_tag!r}")
        assert self.m * self.s_exponent + self.n * self.s_star_exponent == -self.N
        assert self.c == self.s_exponent - self.s_star_exponent

    @property
    def spec(self) -> SurfaceSpec:
        return SurfaceSpec(self.m, self.n)

    def instantiable(self, q=None) -> bool:
        """|p| < 1 and |p*| < 1 for |q| < 1, i.e. both exponents positive."""
        return self.s_exponent > 0 and self.s_star_exponent > 0

    def params(self, q) -> ModelParams:
        q = complex(q)
        s = cmath.exp(float(self.s_exponent) * cmath.log(q))
        return ModelParams(self.N, q, self.c, s)

    def key(self):
        return (self.m, self.n, self.case_tag, self.c, self.s_exponent, self.u or 0)

    def as_dict(self):
        def fr(v):
            return None if v is None else str(v)

        return {
            "N": self.N,
            "m": self.m,
            "n": self.n,
            "case_tag": self.case_tag,
            "c": fr(self.c),
            "lambda": fr(self.lam),
            "lambda_prime": fr(self.lam_prime),
            "s_exponent": fr(self.s_exponent),
            "s_star_exponent": fr(self.s_star_exponent),
            "u": self.u,
            "free_family": self.free_family,
        }


def _divisors(k):
    k = abs(k)
    return [d for d in range(1, k + 1) if k % d == 0]


def _locus(m, n, N, tag, a, a_star, lam=None, lam_prime=None, u=None, free=False, beta=None):
    a, a_star = Fraction(a), Fraction(a_star)
    return AbelianLocus(m, n, N, tag, a - a_star, lam, lam_prime, a, a_star, u, free, beta)


def _unit_lambdas(k_other, k_sum, bound):
    """lambda in Z/2 or Z/u, u | k_other or u | k_sum, numerators |k| <= bound."""
    dens = sorted({2} | set(_divisors(k_other)) | set(_divisors(k_sum)))
    seen = {}
    for u in dens:
        for k in range(-bound, bound + 1):
            lam = Fraction(k, u)
            seen.setdefault(lam, u)
    return sorted(seen.items())


def enumerate_abelian_loci(m, n, N, bound=12):
    """Every sufficient-condition locus for (m, n) with parameters inside ``bound``."""
    m, n, N = int(m), int(n), int(N)
    out = []
    if m == 0 or n == 0:
        return out
    if abs(m) > 1 and abs(n) > 1:
        for lam in range(-bound, bound + 1):
            lp = 1 - lam
            if lam == 0 or lp == 0 or abs(lp) > bound:
                continue
            out.append(_locus(m, n, N, "generic", Fraction(-N * lam, m), Fraction(-N * lp, n),
                              Fraction(lam), Fraction(lp)))
    if abs(n) == 1 and abs(m) > 1:
        for lam, u in _unit_lambdas(m, m + n, bound):
            a = -N * lam
            a_star = -N * n * (1 - lam * m)
            out.append(_locus(m, n, N, "n_unit", a, a_star, lam, None, u))
    if abs(m) == 1 and abs(n) > 1:
        for lp, u in _unit_lambdas(n, n + m, bound):
            a = -N * m * (1 - lp * n)
            a_star = -N * lp
            out.append(_locus(m, n, N, "m_unit", a, a_star, None, lp, u))
    if m == n and abs(m) == 1:
        for k in range(-bound, bound + 1):
            lam = Fraction(k, 2)
            lp = 1 - lam
            out.append(_locus(m, n, N, "n_unit", -N * lam, -N * n * (1 - lam * m), lam, lp, 2))
    if m + n == 0 and abs(n) == 1:
        # critical level: c = N/n and s is free; pick a representative inside the disk
        c = Fraction(N, n)
        a = max(Fraction(0), c) + Fraction(N, 2)
        out.append(_locus(m, n, N, "antidiagonal", a, a - c, free=True))
    elif m + n == 0 and n % 2 == 1:
        out.append(_locus(m, n, N, "antidiagonal", Fraction(-(n - 1) * N, 2 * n),
                          Fraction(-(n + 1) * N, 2 * n)))
    return out


def enumerate_atlas(N, mmax, nmax, bound=12):
    """Loci for all |m| <= mmax, |n| <= nmax, keyed deterministically."""
    out = []
    for m in range(-mmax, mmax + 1):
        for n in range(-nmax, nmax + 1):
            out.extend(enumerate_abelian_loci(m, n, N, bound))
    return out


def _x_samples(rng, count, rmin=0.5, rmax=2.0):
    return [cmath.exp(l) for l in log_annulus_points(count, rng, rmin, rmax)]


def max_deviation(fn, samples, trunc=DEFAULT_TRUNCATION, seed=DEFAULT_SEED):
    """max over resampled x of |fn(x) - 1|, redrawing x on pole hits."""
    rng = make_rng(seed)
    worst = 0.0
    done = 0
    tries = 0
    while done < samples:
        tries += 1
        if tries > 50 * samples:
            raise PoleProximity("could not find pole-free samples")
        x = _x_samples(rng, 1)[0]
        try:
            v = fn(x)
        except PoleProximity:
            continue
        worst = max(worst, abs(v - 1.0))
        done += 1
    return worst


def check_locus(locus: AbelianLocus, q, samples=32, trunc=DEFAULT_TRUNCATION, seed=DEFAULT_SEED,
                require_disk=True):
    """max_x |Y_mn(x) - 1| at the locus instantiated for ``q``.

    Y needs only |q| < 1, so with ``require_disk=False`` the scalar identity
    is checked even when the locus puts p or p* outside the unit disk.
    """
    if require_disk and not locus.instantiable(q):
        raise NomeOutOfDisk(
            f"locus forces |p| or |p*| >= 1 (exponents {locus.s_exponent}, {locus.s_star_exponent})"
        )
    params = locus.params(q)
    spec = locus.spec
    return max_deviation(lambda x: calY(spec, x, params, trunc), samples, trunc, seed)


def perturbed_residual(locus: AbelianLocus, q, delta=0.1, samples=32, trunc=DEFAULT_TRUNCATION,
                       seed=DEFAULT_SEED):
    """Negative control: move c by ``delta``.

    When m + n != 0 the point stays on S_mn (s re-solved from the surface);
    otherwise s is kept and the point leaves the surface.
    """
    m, n, N = locus.m, locus.n, locus.N
    c = float(locus.c) + delta
    if m + n != 0:
        a = (n * c - N) / (m + n)
    else:
        a = float(locus.s_exponent)
    q = complex(q)
    params = ModelParams(N, q, c, cmath.exp(a * cmath.log(q)))
    spec = locus.spec
    return max_deviation(lambda x: calY(spec, x, params, trunc, check_surface=m + n != 0),
                         samples, trunc, seed)


# --- localized center --------------------------------------------------------------

def _check_localized_m(m):
    if m % 2 == 0 or abs(m) == 1:
        raise InvalidM(f"m must be odd with |m| > 1, got {m}")


@dataclass(frozen=True)
class Rejection:
    m: int
    lam: int
    reason: str


def localized_center_params(m, N, lam):
    """Locus with c = -N/m, s = q^(N lam/m), s* = q^(N(lam+1)/m), or a Rejection."""
    m, N, lam = int(m), int(N), int(lam)
    _check_localized_m(m)
    M = abs(m)
    if lam == M - 1:
        return Rejection(m, lam, "lambda = |m|-1")
    if math.gcd(lam, M) != 1:
        return Rejection(m, lam, "gcd(lambda, m) != 1")
    bz = bezout(lam, M)
    if math.gcd(bz.beta + 1, M) != 1:
        return Rejection(m, lam, "gcd(beta+1, m) != 1")
    a = Fraction(N * lam, m)
    return _locus(m, -m, N, "localized_center", a, a + Fraction(N, m), Fraction(lam), None, beta=bz.beta)


def localized_ratio(m, x, params: ModelParams, trunc=DEFAULT_TRUNCATION):
    """prod_{k=1}^m U(s*^-k x)/U(s^-k x) for m > 0,
    prod_{k=0}^{|m|-1} U(s^k x)/U(s*^k x) for m < 0."""
    s, t = params.s, params.s_star
    x = complex(x)
    if m > 0:
        ks = range(1, m + 1)
        num, den = [t ** (-k) * x for k in ks], [s ** (-k) * x for k in ks]
    else:
        ks = range(0, -m)
        num, den = [s ** k * x for k in ks], [t ** k * x for k in ks]
    u = scalar_U_many(params, num + den, trunc)
    return complex(np.prod(u[:len(num)]) / np.prod(u[len(num):]))


def localized_locus_unchecked(m, N, lam):
    """The same parametrization without the acceptance conditions (negative controls)."""
    a = Fraction(N * int(lam), int(m))
    return _locus(int(m), -int(m), N, "localized_center", a, a + Fraction(N, int(m)), Fraction(lam))


def verify_localized_center(locus: AbelianLocus, q, samples=32, trunc=DEFAULT_TRUNCATION,
                            seed=DEFAULT_SEED, require_disk=True):
    """max_x |exchange ratio - 1| at the localized-center locus."""
    if require_disk and not locus.instantiable(q):
        raise NomeOutOfDisk("localized-center locus outside the unit disk for this q")
    params = locus.params(q)
    return max_deviation(lambda x: localized_ratio(locus.m, x, params, trunc), samples, trunc, seed)
