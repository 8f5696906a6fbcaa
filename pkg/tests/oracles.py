"""Slow, independent reference evaluations used only by the tests.

Each oracle is written from the defining formulas with plain loops and
``cmath``; none of them calls into the package numerics.
"""

import cmath
import itertools
import math


def pochhammer_direct(z, nomes, order=64):
    out = 1 + 0j
    for ns in itertools.product(range(order), repeat=len(nomes)):
        t = complex(z)
        for r, n in zip(nomes, ns):
            t *= complex(r) ** n
        out *= 1 - t
    return out


def theta_big_direct(z, p, order=64):
    return pochhammer_direct(z, [p], order) * pochhammer_direct(p / z, [p], order) * pochhammer_direct(p, [p], order)


def theta_char_direct(g1, g2, xi, tau, order=40):
    acc = 0j
    for m in range(-order, order + 1):
        t = m + g1
        acc += cmath.exp(1j * math.pi * t * t * tau + 2j * math.pi * t * (xi + g2))
    return acc


def U_direct(z, N, q, order=64):
    Q = q ** (2 * N)
    z2 = z * z
    num = theta_big_direct(q * q * z2, Q, order) * theta_big_direct(q * q / z2, Q, order)
    den = theta_big_direct(z2, Q, order) * theta_big_direct(1 / z2, Q, order)
    return cmath.exp((2 / N - 2) * cmath.log(q)) * num / den


def Z_direct(N, q, s, z, order=40):
    """Z(z) as an N^2 x N^2 nested list, from the weight-sum formula."""
    p = s * s
    lz = cmath.log(z)
    xi = lz / (1j * math.pi)
    zeta = cmath.log(q) / (1j * math.pi)
    tau = cmath.log(-s) / (1j * math.pi)
    w = cmath.exp(2j * math.pi / N)

    Q = q ** (2 * N)
    z2 = z * z
    c = p * q ** (2 * N - 2)
    kinv = 1 + 0j
    for a in (Q / z2, q * q * z2, p / z2, c * z2):
        kinv *= pochhammer_direct(a, [p, Q], order)
    for a in (Q * z2, q * q / z2, p * z2, c / z2):
        kinv /= pochhammer_direct(a, [p, Q], order)

    pref = (cmath.exp((2 / N - 2) * lz) * kinv * theta_char_direct(0.5, 0.5, zeta, tau)
            / theta_char_direct(0.5, 0.5, xi + zeta, tau))
    M = [[0j] * (N * N) for _ in range(N * N)]
    for a1 in range(N):
        for a2 in range(N):
            g1, g2 = 0.5 + a1 / N, 0.5 + a2 / N
            W = theta_char_direct(g1, g2, xi + zeta / N, tau) / (N * theta_char_direct(g1, g2, zeta / N, tau))
            # I = g^a2 h^a1 has entries w^((i+1) a2) at (i, i + a1); I^-1 = h^-a1 g^-a2
            for i in range(N):
                j = (i + a1) % N
                Iij = w ** ((i + 1) * a2)
                for k in range(N):
                    l = (k - a1) % N
                    Jkl = w ** (-(l + 1) * a2)
                    M[i * N + k][j * N + l] += pref * W * Iij * Jkl
    return M


def g_series_direct(k, z, p, q, terms=150):
    acc = 0j
    for l in range(1, terms + 1):
        acc += (1 - p ** (-k * l)) * (1 - (p ** k * q * q) ** l) / (1 + q ** (2 * l)) * z ** l / l
    return cmath.exp(acc)


def g_product_direct(k, z, p, q, order=64):
    Q4 = q ** 4
    pk = p ** k
    num = (1 - z) * pochhammer_direct(pk * z, [Q4], order) * pochhammer_direct(q * q * z / pk, [Q4], order)
    den = (1 - pk * z) * pochhammer_direct(z / pk, [Q4], order) * pochhammer_direct(q * q * pk * z, [Q4], order)
    return num / den

