import cmath
import math

import numpy as np
import pytest
from hypothesis import given, reject, strategies as st

from ellipticdva import structfn as sf
from ellipticdva.errors import NotOnSurface, PoleProximity, SeriesDiverges, WrongRank
from ellipticdva.params import ModelParams
from ellipticdva.rmatrix import scalar_U
from ellipticdva.suite import surface_params
from oracles import g_product_direct, g_series_direct

TOL = 1e-9
P2 = ModelParams.from_p(2, 0.4, 0.3, 0.09)
P3 = ModelParams(3, 0.35 * cmath.exp(0.2j), 0.7, -cmath.sqrt(0.08 * cmath.exp(0.5j)))
S21 = surface_params(2, -1, 0.4, -2.7)
SURFACES = [surface_params(m, n, 0.4, c) for m, n, c in ((2, -1, -2.7), (3, -1, -2.2), (2, 3, 0.37), (-3, 2, 0.9), (1, 1, 0.4))]
SPECS = [sf.SurfaceSpec(m, n) for m, n in ((2, -1), (3, -1), (2, 3), (-3, 2), (1, 1))]

xs = st.tuples(st.floats(0.6, 1.6), st.floats(-math.pi, math.pi)).map(lambda t: t[0] * cmath.exp(1j * t[1]))


def safe(fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except PoleProximity:
        reject()


def test_F_zero_is_one():
    assert sf.calF(0, 0.37 + 2j, params=P2) == 1


def test_F_one_is_U():
    x = 0.8 * cmath.exp(0.4j)
    assert sf.calF(1, x, params=P2) == scalar_U(P2, x)


def test_F_minus_one_inverts_U():
    x = 0.8 * cmath.exp(0.4j)
    assert abs(sf.calF(-1, x, params=P2) * scalar_U(P2, x / P2.s) - 1) < 1e-13


@pytest.mark.parametrize("m", [1, 2, 3, -1, -2, -3])
@pytest.mark.parametrize("P", [P2, P3], ids=["N2", "N3"])
def test_F_product_vs_theta(m, P):
    x = 0.9 * cmath.exp(0.7j)
    a, b = sf.calF(m, x, params=P), sf.calF_theta(m, x, P)
    assert abs(a - b) < TOL * max(1, abs(a))


def test_F_theta_empty_product():
    assert sf.calF_theta(0, 0.5, P2) == 1


@given(m=st.integers(1, 3), x=xs)
def test_F_theta_m_and_minus_m_compose(m, x):
    # F_m(x) F_-m(s^m x) = 1: the negative product undoes the positive one
    a = safe(sf.calF_theta, m, x, P2)
    b = safe(sf.calF_theta, -m, P2.s ** m * x, P2)
    assert abs(a * b - 1) < TOL * max(1, abs(a))


@given(a=st.integers(-3, 3), x=xs, starred=st.booleans())
def test_F_q_power_periodicity(a, x, starred):
    v = safe(sf.calF, a, x, starred, P3)
    w = safe(sf.calF, a, P3.q ** 3 * x, starred, P3)
    assert abs(v - w) < TOL * max(1, abs(v))


@pytest.mark.parametrize("i", range(len(SPECS)))
def test_Y_at_one(i):
    assert abs(sf.calY(SPECS[i], 1.0, SURFACES[i]) - 1) < TOL


@pytest.mark.parametrize("i", range(len(SPECS)))
def test_Y_sign_flip(i):
    spec, P = SPECS[i], SURFACES[i]
    x = 0.85 * cmath.exp(0.6j)
    assert abs(sf.calY(spec, x, P) - sf.calY(sf.SurfaceSpec(-spec.m, -spec.n), x, P, check_surface=False)) < TOL


@given(i=st.integers(0, len(SPECS) - 1), x=xs)
def test_Y_inversion(i, x):
    spec, P = SPECS[i], SURFACES[i]
    y = safe(sf.calY, spec, x, P)
    assert abs(y * safe(sf.calY, spec, 1 / x, P) - 1) < TOL * max(1, abs(y))


@given(i=st.integers(0, len(SPECS) - 1), x=xs)
def test_surface_rewriting_of_F(i, x):
    spec, P = SPECS[i], SURFACES[i]
    v = safe(sf.calF, spec.m, P.s_star ** spec.n * x, False, P) * safe(sf.calF, -spec.m, x, False, P)
    assert abs(v - 1) < TOL


def test_Y_off_surface_raises():
    with pytest.raises(NotOnSurface):
        sf.calY(sf.SurfaceSpec(2, 3), 0.8, P2)


def test_g_zero_is_one_both_forms():
    assert sf.g_k(1, 0, params=P2) == 1
    assert sf.g_k(1, 0, params=P2, form="series") == 1


def test_g_series_vs_product_example():
    # stated agreement at k=1, z=0.3, q=0.4, p=0.09; |z/p| > 1 puts z outside the series disk
    P = ModelParams.from_p(2, 0.4, 0.3, 0.09)
    a = sf.g_k(1, 0.3, params=P, form="series")
    b = sf.g_k(1, 0.3, params=P, form="product")
    assert abs(a - b) < TOL


def test_g_series_diverges_outside_disk():
    with pytest.raises(SeriesDiverges):
        sf.g_k(1, 0.3, params=P2, form="series")


@given(k=st.integers(1, 3), r=st.floats(0.05, 0.9), phi=st.floats(-math.pi, math.pi))
def test_g_series_is_reciprocal_of_product(k, r, phi):
    # inside the series disk the two stated forms multiply to one
    z = r * abs(P2.p) ** k * cmath.exp(1j * phi)
    s = sf.g_k(k, z, params=P2, form="series")
    p = safe(sf.g_k, k, z, False, P2)
    assert abs(s * p - 1) < TOL


def test_g_forms_match_direct_oracles():
    z = 0.04 * cmath.exp(0.3j)
    assert sf.g_k(1, z, params=P2, form="series") == pytest.approx(g_series_direct(1, z, P2.p, P2.q), rel=1e-12)
    z = 0.5 * cmath.exp(0.3j)
    assert sf.g_k(2, z, params=P2) == pytest.approx(g_product_direct(2, z, P2.p, P2.q), rel=1e-12)


def test_g_starred_is_p_star_substitution():
    z = 0.5j
    assert sf.g_k(2, z, True, P2) == sf.g_product(2, z, P2.p_star, P2.q)


def test_g_rejects_bad_k():
    with pytest.raises(ValueError):
        sf.g_k(0, 0.1, params=P2)


@given(i=st.integers(0, len(SPECS) - 1), x=xs)
def test_Y_FF_vs_gg(i, x):
    spec, P = SPECS[i], SURFACES[i]
    a = safe(sf.calY, spec, x, P)
    b = safe(sf.calY_factored, spec, x, P)
    assert abs(a - b) < TOL * max(1, abs(a))


def test_Y_factored_at_one():
    assert abs(sf.calY_factored(SPECS[0], 1.0, SURFACES[0]) - 1) < TOL


def test_Y_factored_needs_rank_two():
    with pytest.raises(WrongRank):
        sf.calY_factored(sf.SurfaceSpec(1, 1), 0.8, surface_params(1, 1, 0.4, 0.4, N=3))


def test_g_mn_with_unit_m():
    spec, P = SPECS[4], SURFACES[4]
    z = 0.3 + 0.2j
    got = sf.g_mn(spec, z, P)
    assert got == pytest.approx(sf.g_k(1, z, False, P) / sf.g_k(1, z, True, P), rel=1e-14)
    spec = sf.SurfaceSpec(1, 3)
    P = surface_params(1, 3, 0.4, 0.6)
    expected = sf.g_k(1, z, False, P) / sf.g_k(3, z, True, P) / (sf.g_k(1, z, True, P) * sf.g_k(2, z, True, P)) ** 2
    assert sf.g_mn(spec, z, P) == pytest.approx(expected, rel=1e-13)


@given(x=xs)
def test_tildeY_reduces_to_dva(x):
    a = safe(sf.tildeY, 2, x, False, S21)
    b = safe(sf.dva_ratio, x, S21)
    assert abs(a - b) < TOL * max(1, abs(a))


@given(x=xs)
def test_tildeY_starred_reduces_to_dva(x):
    P = surface_params(-1, 2, 0.4, 0.8)
    a = safe(sf.tildeY, 2, x, True, P)
    b = safe(sf.dva_ratio, 1 / x, P, starred=True)
    assert abs(a - b) < TOL * max(1, abs(a))


def _circle_mean(fn, center, r=1e-3, n=16):
    return complex(np.mean([fn(center + r * cmath.exp(2j * math.pi * (k + 0.5) / n)) for k in range(n)]))


def test_tildeY_at_one():
    # stated value 1; x = 1 is removable and the value there is its limit
    value = _circle_mean(lambda x: sf.tildeY(2, x, False, S21), 1.0)
    assert abs(value - 1) < TOL


def test_tildeY_limit_at_one_is_minus_one():
    assert abs(_circle_mean(lambda x: sf.tildeY(2, x, False, S21), 1.0) + 1) < 1e-12
    assert abs(_circle_mean(lambda x: sf.dva_ratio(x, S21), 1.0) + 1) < 1e-12


def test_Y_factored_regular_at_minus_one():
    assert abs(sf.calY_factored(SPECS[2], -1.0, SURFACES[2]) - 1) < TOL


def test_tildeY_needs_rank_two():
    with pytest.raises(WrongRank):
        sf.tildeY(2, 0.8, False, P3)


def test_parameter_map_coefficients():
    L = 20
    a = sf.g1_coefficients(L, P2.p, P2.q)
    b = sf.qpt_coefficients(L, *sf.qpt_from_params(P2))
    assert np.max(np.abs(a - b) / np.maximum(1, np.abs(a))) < 1e-12


def test_exchange_mixed_is_F_ratio():
    P = SURFACES[2]
    x = 0.8 + 0.1j
    y = P.s_star * x
    want = sf.calF(3, x, True, P) * sf.calF(-2, y, False, P) / (sf.calF(-2, x, False, P) * sf.calF(3, y, True, P))
    assert sf.exchange_mixed(2, 3, 1, x, P) == pytest.approx(want, rel=1e-14)
