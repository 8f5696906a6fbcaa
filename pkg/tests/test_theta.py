import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ellipticdva.errors import NomeOutOfDisk, TauNotInUpperHalfPlane, TruncationInsufficient, ZeroArgument
from ellipticdva.theta import (
    DEFAULT_TRUNCATION, HALF, Characteristics, Truncation, qpochhammer, theta_big, theta_big_many,
    theta_char, theta_char_product,
)
from oracles import pochhammer_direct, theta_big_direct, theta_char_direct

TOL = 1e-11
T64 = Truncation(product_order=64)


def test_pochhammer_at_zero_is_one():
    assert qpochhammer(0, [0.1]) == 1


def test_pochhammer_at_one_is_zero():
    assert qpochhammer(1, [0.1]) == 0


def test_double_pochhammer_matches_direct_product():
    got = qpochhammer(0.5, [0.1, 0.04], T64)
    assert got == pytest.approx(pochhammer_direct(0.5, [0.1, 0.04], 64), rel=TOL)


def test_pochhammer_rejects_nome_outside_disk():
    with pytest.raises(NomeOutOfDisk):
        qpochhammer(0.3, [1.2])


def test_pochhammer_reports_insufficient_truncation():
    with pytest.raises(TruncationInsufficient):
        qpochhammer(0.3, [0.9], Truncation(product_order=8))


def test_theta_big_zero_at_one():
    assert abs(theta_big(1, 0.1)) < 1e-15


def test_theta_big_matches_direct_product():
    assert theta_big(0.5, 0.1) == pytest.approx(theta_big_direct(0.5, 0.1), rel=TOL)


def test_theta_big_rejects_zero_argument():
    with pytest.raises(ZeroArgument):
        theta_big(0, 0.1)


def test_theta_big_many_agrees_with_scalar():
    zs = [0.5, 1.3j, -0.7 + 0.2j]
    many = theta_big_many(zs, 0.2)
    for z, v in zip(zs, many):
        assert v == pytest.approx(theta_big(z, 0.2), rel=1e-13)


moduli = st.floats(0.3, 3.0)
phases = st.floats(-math.pi, math.pi)


@given(r=moduli, phi=phases, pr=st.floats(0.01, 0.6), pphi=phases)
def test_theta_big_quasi_periodicity(r, phi, pr, pphi):
    z = r * cmath.exp(1j * phi)
    p = pr * cmath.exp(1j * pphi)
    tr = DEFAULT_TRUNCATION.widened_for(p)
    lhs = theta_big(p * z, p, tr) + theta_big(z, p, tr) / z
    scale = max(1.0, abs(theta_big(z, p, tr) / z))
    assert abs(lhs) < 10 * DEFAULT_TRUNCATION.target_tol * scale


@given(r=moduli, phi=phases, pr=st.floats(0.01, 0.6))
def test_theta_big_inversion(r, phi, pr):
    # Theta_p(1/z) = -Theta_p(z)/z
    z = r * cmath.exp(1j * phi)
    tr = DEFAULT_TRUNCATION.widened_for(pr)
    v = theta_big(z, pr, tr) / z
    assert abs(theta_big(1 / z, pr, tr) + v) < 1e-10 * max(1, abs(v))


def test_theta_char_matches_direct_series():
    got = theta_char(HALF, 0.3, 2j)
    assert got == pytest.approx(theta_char_direct(0.5, 0.5, 0.3, 2j, 40), rel=TOL, abs=1e-15)


def test_theta_char_rejects_lower_half_plane():
    with pytest.raises(TauNotInUpperHalfPlane):
        theta_char(HALF, 0.3, -1j)


chars = st.tuples(st.integers(-4, 4), st.integers(-4, 4), st.sampled_from([2, 3, 4]))


@given(ch=chars, xr=st.floats(-1, 1), xi=st.floats(-0.3, 0.3), tr=st.floats(-0.5, 0.5), ti=st.floats(0.2, 1.5))
def test_theta_char_shift_in_gamma2(ch, xr, xi, tr, ti):
    a, b, d = ch
    c = Characteristics(Fraction(a, d), Fraction(b, d))
    x, tau = complex(xr, xi), complex(tr, ti)
    v = theta_char(c, x, tau)
    shifted = theta_char(c.shifted(0, 1), x, tau)
    expected = cmath.exp(2j * math.pi * float(c.gamma1)) * v
    assert abs(shifted - expected) < 1e-10 * max(1.0, abs(v))


@given(ch=chars, xr=st.floats(-1, 1), xi=st.floats(-0.3, 0.3), tr=st.floats(-0.5, 0.5), ti=st.floats(0.2, 1.5))
def test_theta_char_bridge_to_product(ch, xr, xi, tr, ti):
    a, b, d = ch
    c = Characteristics(Fraction(a, d), Fraction(b, d))
    x, tau = complex(xr, xi), complex(tr, ti)
    series = theta_char(c, x, tau)
    product = theta_char_product(c, x, tau)
    assert abs(series - product) < 1e-9 * max(1.0, abs(series))


def test_truncation_validation():
    with pytest.raises(ValueError):
        Truncation(product_order=0)
    with pytest.raises(ValueError):
        Truncation(target_tol=2.0)


def test_characteristics_level():
    assert Characteristics(Fraction(1, 2), Fraction(1, 4)).fits_level(2)
    assert not Characteristics(Fraction(1, 3), Fraction(1, 2)).fits_level(2)
