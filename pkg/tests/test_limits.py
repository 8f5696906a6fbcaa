import cmath
import math

import numpy as np
import pytest
from hypothesis import given, reject, strategies as st

from ellipticdva import limits as L
from ellipticdva.errors import ExtrapolationUnstable, NotOnSurface, PoleProximity, SeriesDiverges
from ellipticdva.params import ModelParams
from ellipticdva.structfn import SurfaceSpec, calY
from ellipticdva.suite import poisson_panel

SCALE_TOL = 1e-4


def _profile(z):
    return z / (1 - z) ** 2


def test_gk_example():
    est = L.scaling_coeff_gk(1, 1.0, 0.3)
    assert est == pytest.approx(-1.5 * 0.3 / 0.49, rel=SCALE_TOL)
    assert abs(est - (-0.9184)) < 1e-4


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("eta", [0.5, 1.0, 2.0])
def test_gk_closed_form(k, eta):
    z = 0.25 + 0.2j
    est = L.scaling_coeff_gk(k, eta, z)
    closed = -k * (k + 2 * eta) / 2 * _profile(z)
    assert abs(est - closed) < SCALE_TOL * abs(closed)


def test_gk_at_zero():
    for k in (1, 3):
        for eta in (0.5, 2.0):
            assert L.scaling_coeff_gk(k, eta, 0) == 0


@pytest.mark.parametrize("c", [0.3, -0.4])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_gk_starred(c, k):
    eta, z = 1.0, 0.3
    a = 1 - 2 * eta * c
    closed = -k * a * (k * a + 2 * eta) / 2 * _profile(z)
    est = L.scaling_coeff_gk(k, eta, z, c=c, starred=True)
    assert abs(est - closed) < SCALE_TOL * max(abs(closed), abs(_profile(z)))
    assert L.scaling_closed_gk(k, eta, z, c, True) == pytest.approx(closed, rel=1e-14)


def test_gk_outside_disk():
    with pytest.raises(SeriesDiverges):
        L.scaling_coeff_gk(1, 1.0, 1.5)


def test_beta_examples():
    assert L.beta_ell(2, 1.0) == 1
    assert L.beta_ell(1, 1.0) == -1.0
    assert L.beta_ell(1, 0.5) == -0.5


@pytest.mark.parametrize("mn", [(1, 1), (2, 1), (2, 3), (-3, 2), (3, -2), (1, 3)])
@pytest.mark.parametrize("eta", [0.5, 1.0, 2.0])
def test_gmn_closed_form(mn, eta):
    m, n = mn
    c = L.scaling_surface_c(m, n, eta)
    z = 0.3 - 0.1j
    est = L.scaling_coeff_gmn(m, n, c, eta, z)
    closed = L.scaling_closed_gmn(m, n, c, eta, z)
    assert abs(est - closed) / max(abs(closed), abs(_profile(z))) < SCALE_TOL


def test_gmn_unit_unit_profile():
    eta = 1.0
    c = L.scaling_surface_c(1, 1, eta)
    for z in (0.2, 0.4j):
        closed = L.scaling_closed_gmn(1, 1, c, eta, z)
        a = 1 - 2 * eta * c
        assert closed == pytest.approx(-(-eta - a * a * (-eta) - 2 * eta ** 2 * c * a * (-1)) * _profile(z), rel=1e-12)


def test_gmn_at_zero():
    eta = 1.0
    assert L.scaling_coeff_gmn(2, 1, L.scaling_surface_c(2, 1, eta), eta, 0) == 0


def test_gmn_requires_scaling_surface():
    with pytest.raises(NotOnSurface):
        L.scaling_coeff_gmn(2, 1, 0.123, 1.0, 0.3)


def test_richardson_consistency():
    grid = L.DEFAULT_GRID
    finer = grid + (grid[-1] / 2,)
    for k, eta, z in ((1, 1.0, 0.3), (3, 0.5, 0.2 + 0.1j)):
        a = L.scaling_coeff_gk(k, eta, z, grid)
        b = L.scaling_coeff_gk(k, eta, z, finer)
        assert abs(a - b) < 1e-5 * abs(a)


def test_scaling_point_validation():
    with pytest.raises(ValueError):
        L.ScalingPoint(1.0, (1e-2, 5e-3, 2.5e-3), 0, k=1)
    with pytest.raises(ValueError):
        L.ScalingPoint(1.0, (1e-2, 2e-2, 2.5e-3, 1e-3), 0, k=1)
    with pytest.raises(ValueError):
        L.ScalingPoint(1.0, (0.2, 5e-3, 2.5e-3, 1e-3), 0, k=1)
    L.ScalingPoint(1.0, L.DEFAULT_GRID, 0, k=1)


def test_neville_exact_on_polynomials():
    hs = [0.1, 0.05, 0.025, 0.0125]
    est, _ = L.neville(hs, [3 + 2 * h - h ** 2 + 0.5 * h ** 3 for h in hs])
    assert est == pytest.approx(3, abs=1e-12)


def test_unstable_extrapolation_detected():
    with pytest.raises(ExtrapolationUnstable):
        L._extrapolate(lambda e: math.sin(1 / e), L.DEFAULT_GRID)


# --- Poisson ----------------------------------------------------------------------

Q = 0.6
EVEN = L.PoissonCase("n_unit_even", 2, 1, 2)
ODD = L.PoissonCase("n_unit_odd", 3, 1, 1)


def test_even_prefactor():
    assert L.poisson_prefactors(EVEN) == (3,)


def test_odd_floor_terms():
    assert ODD.k_sup == 3
    assert L.poisson_prefactors(ODD) == (2, 4)


def test_I_at_zero():
    for case in poisson_panel():
        assert L.poisson_I(case, 0, q=Q) == 0


def test_f_at_one_vanishes():
    for case in poisson_panel():
        assert abs(L.poisson_f(case, 1.0, q=Q)) < 1e-12


xs = st.tuples(st.floats(0.55, 1.8), st.floats(-math.pi, math.pi)).map(lambda t: t[0] * cmath.exp(1j * t[1]))


@given(i=st.integers(0, len(poisson_panel()) - 1), x=xs)
def test_f_antisymmetry(i, x):
    case = poisson_panel()[i]
    try:
        a = L.poisson_f(case, x, q=Q)
        b = L.poisson_f(case, 1 / x, q=Q)
    except PoleProximity:
        reject()
    assert abs(a + b) < 1e-12 * max(1, abs(a))


def test_even_example_matches_oracle():
    closed = L.poisson_f(EVEN, 0.8, 2, Q)
    oracle = L.poisson_fd_oracle(EVEN, 0.8, 2, Q)
    assert abs(closed - oracle) < 1e-5 * abs(oracle)


def test_oracle_step_robustness():
    for x in (0.8, 0.9 * cmath.exp(0.5j), 1.3j):
        a = L.poisson_fd_oracle(EVEN, x, 2, Q, 1e-4)
        b = L.poisson_fd_oracle(EVEN, x, 2, Q, 1e-5)
        assert abs(a - b) < 1e-4 * abs(b)


def test_oracle_off_surface():
    with pytest.raises(NotOnSurface):
        L.poisson_fd_oracle(EVEN, 0.8, 2, Q, spec=SurfaceSpec(3, 2))


def test_constant_along_critical_locus():
    # (1,-1) at c = -N: s is free, so moving it keeps Y = 1 and the derivative is 0
    spec = SurfaceSpec(1, -1)
    eps, x = 1e-4, 0.8 * cmath.exp(0.4j)

    def lnY(e):
        P = ModelParams(2, Q, -2.0, Q ** (1.0 + e))
        return cmath.log(calY(spec, x, P))

    assert abs((lnY(eps) - lnY(-eps)) / (2 * eps)) < 1e-8


@pytest.mark.parametrize("case", poisson_panel(), ids=lambda c: f"{c.case_tag}[{c.m},{c.n},{c.ell},N{c.N},u{c.u}]")
def test_closed_form_against_oracles(case):
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 4:
        x = cmath.exp(complex(rng.uniform(-0.5, 0.5), rng.uniform(-math.pi, math.pi)))
        try:
            closed = L.poisson_f(case, x, q=Q)
            fd = L.poisson_fd_extrapolated(case, x, Q)
            exact = L.poisson_f_analytic(case, x, Q)
        except PoleProximity:
            continue
        checked += 1
        assert L.poisson_mismatch(closed, fd) < 1e-5
        assert abs(closed - exact) < 1e-8 * max(1, abs(exact))


def test_m_unit_normalization_is_minus_one():
    case = L.PoissonCase("m_unit", 1, 3, 2)
    k, misfit = L.fit_m_unit_normalization(case, [0.8, 0.7j, 1.2 * cmath.exp(0.3j)], Q)
    assert abs(k - L.M_UNIT_NORMALIZATION) < 1e-6 and misfit < 1e-6


def test_case_invariants():
    d = L.PoissonCase("n_unit_divisor", 4, 1, 1, u=4)
    assert d.k_sup == 4 and d.g * d.u in (d.k_sup, d.k_sup + 1)
    d = L.PoissonCase("n_unit_divisor", 3, 1, 1, u=4)
    assert d.eta_sign == -1 and d.g * d.u == d.k_sup + 1
    with pytest.raises(ValueError):
        L.PoissonCase("n_unit_divisor", 4, 1, 1, u=3)
    with pytest.raises(ValueError):
        L.PoissonCase("n_unit_even", 2, 1, 1)
    with pytest.raises(ValueError):
        L.PoissonCase("both_large", 2, -3, 1)
    with pytest.raises(ValueError):
        L.PoissonCase("bogus", 2, 1, 2)


def test_case_lies_on_surface():
    for case in poisson_panel():
        assert case.spec.holds(case.params(Q))


def test_mismatch_floor():
    assert L.poisson_mismatch(1e-9, 0.0) == pytest.approx(1e-9 / 1e-3)
    assert L.poisson_mismatch(1.0 + 1e-6, 1.0) == pytest.approx(1e-6)
