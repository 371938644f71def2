import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from probrenorm import hfun, zetaref
from probrenorm.errors import CoefficientOverflow, DimensionTooLarge, OutsideConvergence, UnknownFamily


def rel(a, b):
    return abs(complex(a) - complex(b)) / max(1.0, abs(complex(b)))


# ---- eval_f -------------------------------------------------------------------

def test_power_eval():
    assert hfun.eval_f(hfun.power_family(), 0.5, 4.0).value == pytest.approx(2.0, abs=1e-15)


def test_hurwitz_eval_is_s_zeta():
    got = hfun.eval_f(hfun.hurwitz_family(), 2, 1.0).value
    assert abs(got - (-1 / 6)) < 1e-12


def test_jacobi_eval_against_direct_legendre_sum():
    # Σ P_i(0.5) (1+i)^-3 with |P_i(0.5)| <= 1: N terms leave a tail below 1/(2 N^2)
    n = 2_000_000
    p = hfun.jacobi_values(0, 0, 0.5, n - 1)
    direct = math.fsum(p / np.arange(1, n + 1, dtype=float) ** 3)
    got = hfun.eval_f(hfun.jacobi_family(0, 0, 0.5), -3, 1.0, tol=1e-12).value
    assert abs(got - direct) < 1e-11


@settings(max_examples=30, deadline=None)
@given(sr=st.floats(-6, -4.5), si=st.floats(-3, 3), t=st.floats(0.5, 20))
def test_periodic_series_matches_closed_form(sr, si, t):
    s = complex(sr, si)
    for fam in (hfun.hurwitz_family(), hfun.eta_family(), hfun.character_family()):
        closed = hfun.eval_f(fam, s, t).value
        series = hfun.eval_f(fam, s, t, force_series=True).value
        assert abs(closed - series) < 1e-11 * max(1.0, abs(closed))


def test_outside_convergence():
    with pytest.raises(OutsideConvergence):
        hfun.eval_f(hfun.jacobi_family(), -0.95, 1.0)
    with pytest.raises(OutsideConvergence):
        hfun.eval_f(hfun.ehrhart_family("box", 2), 0.0, 1.0)


def test_coefficient_overflow_flags_bad_declaration():
    bad = hfun.HFamily("bad", 0, lambda n: np.asarray(n, dtype=float) ** 3, 0.0, None, -5.0)
    with pytest.raises(CoefficientOverflow):
        hfun.eval_f(bad, -8.0, 1.0)


def test_eval_rejects_nonpositive_t():
    with pytest.raises(ValueError):
        hfun.eval_f(hfun.power_family(), 1.0, 0.0)


# ---- term_a -------------------------------------------------------------------

def test_term_examples():
    p = hfun.power_family()
    assert hfun.term_a(p, 2, 1.0, 7) == pytest.approx(7.0)
    assert hfun.term_a(p, -1, 1.0, 4) == pytest.approx(1 / 16)
    assert hfun.term_a(p, 2, 1.0, 0) == 0
    got = hfun.term_a(hfun.hurwitz_family(), -2, 1.0, 3)
    assert rel(got, -3 * complex(mpmath.zeta(4, 3))) < 1e-12


def test_family_terms_agree_with_term_a():
    for fam, s in ((hfun.power_family(), 0.5), (hfun.jacobi_family(), -4.0), (hfun.gauss_ideal_family(), -4.0)):
        terms = hfun.family_terms(fam, s, 1.0, 30)
        for n in (0, 1, 7, 30):
            assert abs(terms[n] - hfun.term_a(fam, s, 1.0, n)) < 1e-13


# ---- scaled_family ------------------------------------------------------------

def test_power_is_scale_invariant():
    p = hfun.power_family()
    assert hfun.scaled_family(p, 3) is p


def test_scaled_hurwitz_example():
    got = hfun.eval_f(hfun.scaled_family(hfun.hurwitz_family(), 2), -2, 1.0).value
    assert rel(got, 4 * (-2) * complex(mpmath.zeta(3, 2))) < 1e-12


@settings(max_examples=10, deadline=None)
@given(sr=st.floats(-3, 3), si=st.floats(-2, 2), t=st.floats(0.5, 10))
def test_scale_one_is_identity(sr, si, t):
    fam = hfun.eta_family()
    s = complex(sr, si)
    assert hfun.eval_f(hfun.scaled_family(fam, 1), s, t).value == hfun.eval_f(fam, s, t).value


# ---- coefficient generators -------------------------------------------------

def test_coefficient_examples():
    assert hfun.ehrhart_coeff("box", 2)(np.array([3]))[0] == 16
    assert hfun.ehrhart_coeff("simplex", 2)(np.array([3]))[0] == 10
    assert hfun.gauss_ideal_coeff(np.array([5]))[0] == 2
    assert hfun.gauss_ideal_coeff(np.array([3]))[0] == 0
    assert hfun.jacobi_coeff(0, 0, 0.5)(np.array([2]))[0] == pytest.approx(-0.125)
    assert list(hfun.constant_coeff(np.arange(1, 4))) == [1, 1, 1]
    assert list(hfun.alternating_coeff(np.arange(1, 5))) == [1, -1, 1, -1]


def test_jacobi_family_packaging_starts_at_p0():
    fam = hfun.jacobi_family(0, 0, 0.5)
    c = fam.coefficients(3)
    assert c[0] == pytest.approx(1.0)  # c_1 = P_0
    assert c[1] == pytest.approx(0.5)  # c_2 = P_1(0.5)
    assert c[2] == pytest.approx(-0.125)  # c_3 = P_2(0.5)


@pytest.mark.parametrize("shape", ["box", "simplex"])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_ehrhart_matches_lattice_counts(shape, d):
    ns = np.arange(21)
    closed = hfun.ehrhart_coeff(shape, d)(ns)
    brute = [hfun.count_lattice_points(shape, d, int(n)) for n in ns]
    assert list(closed) == brute


def test_polytope_limits():
    with pytest.raises(DimensionTooLarge):
        hfun.ehrhart_coeff("box", 5)
    with pytest.raises(ValueError):
        hfun.ehrhart_coeff("sphere", 2)


@pytest.mark.parametrize("a,b,x", [(0, 0, 0.5), (1.5, -0.3, -0.2), (2, 3, 0.7), (-0.5, -0.5, 0.1)])
def test_jacobi_recurrence_matches_generating_function(a, b, x):
    rec = hfun.jacobi_values(a, b, x, 8)
    gen = hfun.jacobi_generating_series(a, b, x, 8)
    assert np.max(np.abs(rec - gen)) < 1e-9


def test_jacobi_matches_mpmath():
    vals = hfun.jacobi_values(1.5, -0.3, 0.4, 12)
    for n in range(13):
        assert vals[n] == pytest.approx(float(mpmath.jacobi(n, 1.5, -0.3, 0.4)), abs=1e-12)


def test_gauss_circle_trend():
    c = hfun.gauss_ideal_coeff(np.arange(1, 10_001))
    assert abs(c.sum() / 1e4 - math.pi / 4) < 0.1 * math.pi / 4


def test_gauss_ideal_counts_representations():
    # c_n = r_2(n) / 4, the number of ideals of norm n in Z[i]
    for n in range(1, 60):
        r2 = sum(1 for a in range(-8, 9) for b in range(-8, 9) if a * a + b * b == n)
        assert hfun.gauss_ideal_coeff(np.array([n]))[0] * 4 == r2


# ---- characters ----------------------------------------------------------------

def test_character_validation():
    hfun.Character((1, 0, -1, 0))
    with pytest.raises(ValueError):
        hfun.Character((1, 1, -1, 0))  # χ(2) must vanish mod 4
    with pytest.raises(ValueError):
        hfun.Character((1, 0, 0.5, 0))  # not unimodular
    with pytest.raises(ValueError):
        hfun.Character((1, -1, 1, -1, 1))  # not multiplicative mod 5


def test_character_packaging_matches_L():
    fam = hfun.character_family()
    for sigma in (5.0, 6.5):
        got = hfun.eval_f(fam, -sigma, 1.0, force_series=True).value
        assert rel(got, zetaref.dirichlet_L(sigma, (1, 0, -1, 0)).value) < 1e-8


def test_character_packaging_nu():
    assert hfun.character_family((1, 0, -1, 0)).nu == 0
    assert hfun.character_family((1, 0)).nu == 1  # principal mod 2


# ---- H-derivative ------------------------------------------------------------

def test_h_derivative_examples():
    assert hfun.check_h_derivative(hfun.power_family(), 3, 2.0) < 1e-8
    assert hfun.check_h_derivative(hfun.hurwitz_family(), -2, 1.5) < 1e-6
    assert hfun.check_h_derivative(hfun.jacobi_family(), -4, 2.0) < 1e-6


@pytest.mark.parametrize("name", sorted(set(hfun.FAMILY_BUILDERS) - {"power"}))
def test_abscissa_bound(name):
    # power has no coefficient series, its closed form holds everywhere
    fam = hfun.build_family(name)
    assert fam.convergence_threshold <= fam.nu - fam.growth_exponent


def test_registry():
    with pytest.raises(UnknownFamily):
        hfun.build_family("nope")
    assert hfun.build_family("grandi") is hfun.GRANDI
    names = [r["name"] for r in hfun.describe_families()]
    assert set(hfun.FAMILY_BUILDERS) <= set(names) and "grandi" in names


def test_grandi_terms():
    assert list(hfun.GRANDI.terms(5).real) == [0, 1, -1, 1, -1, 1]
