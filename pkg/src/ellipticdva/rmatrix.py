"""The Z_N-symmetric elliptic R-matrix, its normalized form, and residuals of
the identities it satisfies.

Spectral parameters are handled through their logarithms.  For N >= 3 the
weights depend on xi = log(z)/(i pi) and not on z alone, so composite
arguments such as w/z or q^N z are formed additively in log space.  Every
public builder accepts ``z`` and an optional ``log_z``; when ``log_z`` is
omitted the principal logarithm of ``z`` is used.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PoleProximity, WrongRank
from .params import ModelParams
from .tensor import embed, max_norm, partial_transpose, permutation, swap_sites
from .theta import (
    DEFAULT_TRUNCATION,
    HALF,
    Characteristics,
    Truncation,
    qpochhammer,
    theta_big,
    theta_big_many,
    theta_char,
)

IPI = 1j * math.pi


@dataclass(frozen=True)
class GaugeMatrices:
    """g = diag(omega^i), its square root diag(exp(i pi i/N)), the cyclic
    shift h and G = g^(1/2) h g^(1/2), for i = 1..N."""

    N: int
    g: np.ndarray
    g_half: np.ndarray
    h: np.ndarray
    G: np.ndarray

    @classmethod
    def build(cls, N):
        i = np.arange(1, N + 1)
        g = np.diag(np.exp(2j * math.pi * i / N))
        g_half = np.diag(np.exp(1j * math.pi * i / N))
        h = np.zeros((N, N), dtype=complex)
        for k in range(N):
            h[k, (k + 1) % N] = 1.0
        return cls(N, g, g_half, h, g_half @ h @ g_half)


def _log(z, log_z):
    if log_z is not None:
        return complex(log_z)
    z = complex(z)
    if z == 0:
        raise PoleProximity("spectral parameter z = 0")
    return cmath.log(z)


def _guard(value, trunc, what):
    if abs(value) < trunc.pole_threshold:
        raise PoleProximity(f"{what} = {abs(value):.3g} below {trunc.pole_threshold:.3g}")
    return value


def kappa_inverse(params: ModelParams, z=None, trunc: Truncation = DEFAULT_TRUNCATION, log_z=None):
    """1/kappa(z^2): ratio of eight double products with nomes (p, q^{2N})."""
    lz = _log(z, log_z)
    N, q, p = params.N, params.q, params.p
    Q = q ** (2 * N)
    z2 = cmath.exp(2 * lz)
    c = p * q ** (2 * N - 2)
    nomes = [p, Q]
    num = [Q / z2, q * q * z2, p / z2, c * z2]
    den = [Q * z2, q * q / z2, p * z2, c / z2]
    top = 1.0 + 0j
    for a in num:
        top *= qpochhammer(a, nomes, trunc)
    bottom = 1.0 + 0j
    for a in den:
        bottom *= qpochhammer(a, nomes, trunc)
    _guard(bottom, trunc, "kappa denominator")
    return top / bottom


def weight_sum(params: ModelParams, z=None, trunc: Truncation = DEFAULT_TRUNCATION, log_z=None):
    """Sum over alpha in Z_N^2 of W_alpha(z) I_alpha (x) I_alpha^{-1}, I_alpha = g^a2 h^a1."""
    params.require_nomes()
    lz = _log(z, log_z)
    N = params.N
    gm = GaugeMatrices.build(N)
    xi = lz / IPI
    zeta = params.zeta
    tau = params.tau
    S = np.zeros((N * N, N * N), dtype=complex)
    for a1 in range(N):
        for a2 in range(N):
            ch = Characteristics(Fraction(1, 2) + Fraction(a1, N), Fraction(1, 2) + Fraction(a2, N))
            den = _guard(N * theta_char(ch, zeta / N, tau, trunc), trunc, "weight denominator")
            W = theta_char(ch, xi + zeta / N, tau, trunc) / den
            I = np.linalg.matrix_power(gm.g, a2) @ np.linalg.matrix_power(gm.h, a1)
            S += W * np.kron(I, np.linalg.inv(I))
    return S


def build_Z(params: ModelParams, z=None, trunc: Truncation = DEFAULT_TRUNCATION, log_z=None):
    """Z(z) = z^(2/N-2) kappa(z^2)^-1 theta[1/2,1/2](zeta)/theta[1/2,1/2](xi+zeta) * weight sum."""
    params.require_nomes()
    lz = _log(z, log_z)
    N = params.N
    xi = lz / IPI
    den = _guard(theta_char(HALF, xi + params.zeta, params.tau, trunc), trunc, "theta[1/2,1/2](xi+zeta)")
    ratio = theta_char(HALF, params.zeta, params.tau, trunc) / den
    pref = cmath.exp((2.0 / N - 2.0) * lz) * kappa_inverse(params, trunc=trunc, log_z=lz) * ratio
    return pref * weight_sum(params, trunc=trunc, log_z=lz)


def build_R(params: ModelParams, z=None, trunc: Truncation = DEFAULT_TRUNCATION, log_z=None):
    """R = (g^1/2 (x) g^1/2) Z (g^-1/2 (x) g^-1/2)."""
    gh = np.diag(GaugeMatrices.build(params.N).g_half)
    d = np.kron(gh, gh)
    Z = build_Z(params, z, trunc, log_z)
    return (d[:, None] * Z) / d[None, :]


def tau_N(params: ModelParams, z=None, trunc: Truncation = DEFAULT_TRUNCATION, log_z=None):
    """tau_N(z) = z^(2/N-2) Theta_{q^2N}(q z^2) / Theta_{q^2N}(q z^-2)."""
    lz = _log(z, log_z)
    N, q = params.N, params.q
    Q = q ** (2 * N)
    z2 = cmath.exp(2 * lz)
    den = _guard(theta_big(q / z2, Q, trunc), trunc, "Theta(q z^-2)")
    return cmath.exp((2.0 / N - 2.0) * lz) * theta_big(q * z2, Q, trunc) / den


def build_Rhat(params: ModelParams, z=None, trunc: Truncation = DEFAULT_TRUNCATION, log_z=None):
    """Rhat(z) = tau_N(q^(1/2)/z) R(z)."""
    lz = _log(z, log_z)
    t = tau_N(params, trunc=trunc, log_z=0.5 * params.log_q - lz)
    return t * build_R(params, trunc=trunc, log_z=lz)


def fold_q_power(params: ModelParams, z):
    """Move z into |q|^{N/2} < |z| <= |q|^{-N/2} by a power of q^N."""
    z = complex(z)
    N = params.N
    j = round(math.log(abs(z)) / (N * math.log(abs(params.q))))
    return z * params.q ** (-N * j) if j else z


def scalar_U(params: ModelParams, z, trunc: Truncation = DEFAULT_TRUNCATION):
    """U(z) = q^(2/N-2) Theta(q^2 z^2) Theta(q^2 z^-2) / (Theta(z^2) Theta(z^-2)), nome q^2N.

    U depends on q only and is q^N-periodic, so the argument is folded first.
    """
    z = complex(z)
    if z == 0:
        raise PoleProximity("U evaluated at z = 0")
    N, q = params.N, params.q
    x = fold_q_power(params, z)
    Q = q ** (2 * N)
    x2 = x * x
    th = theta_big_many([q * q * x2, q * q / x2, x2, 1.0 / x2], Q, trunc)
    den = _guard(th[2] * th[3], trunc, "Theta(z^2) Theta(z^-2)")
    return params.q_power(2.0 / N - 2.0) * th[0] * th[1] / den


def scalar_U_many(params: ModelParams, zs, trunc: Truncation = DEFAULT_TRUNCATION) -> np.ndarray:
    """:func:`scalar_U` over an array of arguments in one vectorized pass."""
    zs = np.asarray(zs, dtype=complex).ravel()
    if np.any(zs == 0):
        raise PoleProximity("U evaluated at z = 0")
    N, q = params.N, params.q
    j = np.rint(np.log(np.abs(zs)) / (N * math.log(abs(q))))
    x = zs * np.exp(-N * j * params.log_q)
    Q = q ** (2 * N)
    x2 = x * x
    th = theta_big_many(np.concatenate([q * q * x2, q * q / x2, x2, 1.0 / x2]), Q, trunc)
    k = len(zs)
    den = th[2 * k:3 * k] * th[3 * k:]
    if np.min(np.abs(den)) < trunc.pole_threshold:
        raise PoleProximity(f"Theta(z^2) Theta(z^-2) = {np.min(np.abs(den)):.3g} near a pole of U")
    return params.q_power(2.0 / N - 2.0) * th[:k] * th[k:2 * k] / den


def explicit_gl2(params: ModelParams, z=None, trunc: Truncation = DEFAULT_TRUNCATION, log_z=None):
    """Closed 4x4 form at N = 2, written with d = s Theta(z^2)Theta(q^2)/(q z^2 Theta(p q^2 z^2)).

    This coincides with :func:`build_Z`; conjugation by g^1/2 (x) g^1/2
    flips the sign of the d entries.
    """
    if params.N != 2:
        raise WrongRank("explicit form exists for N = 2 only")
    params.require_nomes()
    lz = _log(z, log_z)
    q, p, s = params.q, params.p, params.s
    P2 = p * p
    zz = cmath.exp(lz)
    z2 = zz * zz

    def th(x):
        return theta_big(x, P2, trunc)

    den_a = _guard(th(p * q * q * z2), trunc, "Theta(p q^2 z^2)")
    den_b = _guard(th(q * q * z2), trunc, "Theta(q^2 z^2)")
    a = th(p * z2) * th(p * q * q) / den_a / zz
    d = s / (q * z2) * th(z2) * th(q * q) / den_a
    b = q / zz * th(z2) * th(p * q * q) / den_b
    c = th(p * z2) * th(q * q) / den_b
    norm = kappa_inverse(params, trunc=trunc, log_z=lz) * qpochhammer(P2, [P2], trunc) / qpochhammer(p, [p], trunc) ** 2
    return norm * np.array([[a, 0, 0, d], [0, b, c, 0], [0, c, b, 0], [d, 0, 0, a]], dtype=complex)


# --- identity residuals -------------------------------------------------------

def ybe_residual(params, z=None, w=None, trunc=DEFAULT_TRUNCATION, log_z=None, log_w=None):
    """max |R12(z) R13(w) R23(w/z) - R23(w/z) R13(w) R12(z)|."""
    lz, lw = _log(z, log_z), _log(w, log_w)
    N = params.N
    R12 = embed(build_R(params, trunc=trunc, log_z=lz), 1, 2, N)
    R13 = embed(build_R(params, trunc=trunc, log_z=lw), 1, 3, N)
    R23 = embed(build_R(params, trunc=trunc, log_z=lw - lz), 2, 3, N)
    return max_norm(R12 @ R13 @ R23 - R23 @ R13 @ R12)


def unitarity_residual(params, z=None, trunc=DEFAULT_TRUNCATION, log_z=None):
    """max |R12(z) R21(1/z) - 1|."""
    lz = _log(z, log_z)
    N = params.N
    R = build_R(params, trunc=trunc, log_z=lz)
    R21 = swap_sites(build_R(params, trunc=trunc, log_z=-lz), N)
    return max_norm(R @ R21 - np.eye(N * N))


def regularity_residual(params, trunc=DEFAULT_TRUNCATION):
    """max |R(1) - P|."""
    return max_norm(build_R(params, trunc=trunc, log_z=0.0) - permutation(params.N))


def crossing_residual(params, z=None, trunc=DEFAULT_TRUNCATION, log_z=None):
    """max |R12(z)^t2 R21(z^-1 q^-N)^t2 - 1|."""
    lz = _log(z, log_z)
    N = params.N
    A = partial_transpose(build_R(params, trunc=trunc, log_z=lz), N)
    B = build_R(params, trunc=trunc, log_z=-lz - N * params.log_q)
    B = partial_transpose(swap_sites(B, N), N)
    return max_norm(A @ B - np.eye(N * N))


def antisymmetry_residual(params, z=None, trunc=DEFAULT_TRUNCATION, log_z=None):
    """max |R(-z) - omega (g^-1 (x) 1) R(z) (g (x) 1)| with log(-z) = log z + i pi."""
    lz = _log(z, log_z)
    N = params.N
    gm = GaugeMatrices.build(N)
    eye = np.eye(N)
    R = build_R(params, trunc=trunc, log_z=lz)
    rhs = params.omega * np.kron(np.linalg.inv(gm.g), eye) @ R @ np.kron(gm.g, eye)
    return max_norm(build_R(params, trunc=trunc, log_z=lz + IPI) - rhs)


def quasi_periodicity_residual(params, z=None, trunc=DEFAULT_TRUNCATION, log_z=None):
    """max |Rhat12(s z) - (G (x) 1)^-1 Rhat21(1/z)^-1 (G (x) 1)|."""
    lz = _log(z, log_z)
    N = params.N
    G1 = np.kron(GaugeMatrices.build(N).G, np.eye(N))
    lhs = build_Rhat(params, trunc=trunc, log_z=params.log_s + lz)
    inner = np.linalg.inv(swap_sites(build_Rhat(params, trunc=trunc, log_z=-lz), N))
    return max_norm(lhs - np.linalg.inv(G1) @ inner @ G1)


def inversion_transpose_residual(params, z=None, trunc=DEFAULT_TRUNCATION, log_z=None):
    """max |(Rhat(x)^t2)^-1 - (Rhat(q^N x)^-1)^t2|."""
    lz = _log(z, log_z)
    N = params.N
    A = np.linalg.inv(partial_transpose(build_Rhat(params, trunc=trunc, log_z=lz), N))
    B = partial_transpose(np.linalg.inv(build_Rhat(params, trunc=trunc, log_z=lz + N * params.log_q)), N)
    return max_norm(A - B)


def rhat_unitarity_residual(params, z=None, trunc=DEFAULT_TRUNCATION, log_z=None):
    """max |Rhat12(z) Rhat21(1/z) - U(z)| / max(1, |U(z)|).

    U has poles at z = +-1, so the residual is taken relative to it there.
    """
    lz = _log(z, log_z)
    N = params.N
    A = build_Rhat(params, trunc=trunc, log_z=lz)
    B = swap_sites(build_Rhat(params, trunc=trunc, log_z=-lz), N)
    u = scalar_U(params, cmath.exp(lz), trunc)
    return max_norm(A @ B - u * np.eye(N * N)) / max(1.0, abs(u))


def u_factorization_residual(params, z=None, trunc=DEFAULT_TRUNCATION, log_z=None):
    """|U(z) - tau_N(q^1/2 z) tau_N(q^1/2 / z)| / max(1, |U(z)|)."""
    lz = _log(z, log_z)
    hq = 0.5 * params.log_q
    t = tau_N(params, trunc=trunc, log_z=hq + lz) * tau_N(params, trunc=trunc, log_z=hq - lz)
    u = scalar_U(params, cmath.exp(lz), trunc)
    return abs(u - t) / max(1.0, abs(u))


def intertwiner_residual(params, m, x=None, starred=False, trunc=DEFAULT_TRUNCATION, log_x=None):
    """max |(G^-m (x) 1) Rhat(x) - F_m(x) Rhat(beta x) (G^-m (x) 1)|, beta = s^m.

    The starred relation uses (s*, p*) throughout.
    """
    from .structfn import calF

    m = int(m)
    lx = _log(x, log_x)
    if m == 0:
        return 0.0
    N = params.N
    P = params.dual() if starred else params
    Gm = np.kron(np.linalg.matrix_power(np.linalg.inv(GaugeMatrices.build(N).G), m), np.eye(N))
    lhs = Gm @ build_Rhat(P, trunc=trunc, log_z=lx)
    F = calF(m, cmath.exp(lx), starred, params, trunc)
    rhs = F * build_Rhat(P, trunc=trunc, log_z=m * P.log_s + lx) @ Gm
    return max_norm(lhs - rhs)


def _circle_mean(fn, center, radius=1e-2, points=16):
    acc = 0
    for k in range(points):
        acc = acc + fn(center + radius * cmath.exp(2j * math.pi * (k + 0.5) / points))
    return acc / points


def r_at_removable(params, log_z, trunc=DEFAULT_TRUNCATION, radius=1e-2, points=16):
    """R at a removable singularity, as the mean of R over a small circle in log z."""
    return _circle_mean(lambda l: build_R(params, trunc=trunc, log_z=l), complex(log_z), radius, points)


def antisymmetrizer_check(params, trunc=DEFAULT_TRUNCATION):
    """max |R(-1/q) - (1 - P)| at N = 2.

    z = -1/q is a zero of theta[1/2,1/2](xi+zeta); the value there is the
    analytic limit, obtained by a circle mean around the point.
    """
    if params.N != 2:
        raise WrongRank("the antisymmetrizer check is stated for N = 2")
    params.require_nomes()
    R = r_at_removable(params, -params.log_q + IPI, trunc)
    return max_norm(R - (np.eye(4) - permutation(2)))


def antisymmetrizer_diagnostics(params, trunc=DEFAULT_TRUNCATION):
    """Residuals of what R actually equals at z = -1/q and z = 1/q (N = 2)."""
    if params.N != 2:
        raise WrongRank("the antisymmetrizer check is stated for N = 2")
    params.require_nomes()
    eye, P = np.eye(4), permutation(2)
    sz = np.kron(np.diag([1.0, -1.0]), np.eye(2))
    at_minus = r_at_removable(params, -params.log_q + IPI, trunc)
    at_plus = r_at_removable(params, -params.log_q, trunc)
    return {
        "R(-1/q) vs 1-P": max_norm(at_minus - (eye - P)),
        "R(-1/q) vs (sz x 1)(1-P)(sz x 1)": max_norm(at_minus - sz @ (eye - P) @ sz),
        "R(1/q) vs P-1": max_norm(at_plus - (P - eye)),
    }
