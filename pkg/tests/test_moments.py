import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from rmtzeta.ensembles import Group, SymmetryClass, det_minus_identity, weyl_average
from rmtzeta import moments as M

SMALL_CLASSES = [SymmetryClass(Group.UNITARY, 1), SymmetryClass(Group.UNITARY, 2),
                 SymmetryClass(Group.UNITARY, 3), SymmetryClass(Group.USP, 2),
                 SymmetryClass(Group.SO_EVEN, 2)]


def weyl_moment(cls, s):
    power = 2 * s if cls.group is Group.UNITARY else s
    return weyl_average(cls, lambda a: det_minus_identity(a) ** power)


@pytest.mark.parametrize("N", [1, 2, 5, 17, 50])
def test_moment_u_telescopes(N):
    assert M.moment_U(N, 1) == pytest.approx(N + 1, rel=1e-12)


@pytest.mark.parametrize("cls", SMALL_CLASSES, ids=lambda c: c.label)
@pytest.mark.parametrize("s", [1, 2])
def test_closed_forms_match_weyl(cls, s):
    assert M.closed_form_moment(cls, s) == pytest.approx(weyl_moment(cls, s), rel=1e-8)


def test_corrected_small_values():
    assert M.moment_Sp(2, 1) == pytest.approx(2.0, rel=1e-14)
    assert M.moment_SO_even(2, 1) == pytest.approx(2.0, rel=1e-14)
    assert M.moment_U(2, 1) == pytest.approx(3.0, rel=1e-14)


@pytest.mark.parametrize("f,arg", [(M.moment_U, 7), (M.moment_Sp, 8), (M.moment_SO_even, 8)])
def test_zeroth_moment_is_one(f, arg):
    assert f(arg, 0) == 1.0


def test_domain_errors():
    with pytest.raises(ValueError):
        M.moment_U(3, -0.5)
    with pytest.raises(ValueError):
        M.moment_Sp(3, 1)
    with pytest.raises(ValueError):
        M.moment_SO_even(0, 1)
    with pytest.raises(ValueError):
        M.closed_form_moment(SymmetryClass(Group.SO_ODD, 3), 1)


def test_log_convexity():
    vals = [math.log(M.moment_U(12, s)) for s in (0.5, 1.0, 1.5)]
    assert vals[1] <= 0.5 * (vals[0] + vals[2])


def test_barnes_against_mpmath():
    for z in (0.5, 1.3, 2.0, 7.25, 19.9, 31.0, 44.5):
        ref = float(mpmath.log(mpmath.barnesg(z)))
        assert M.log_barnes_g(z) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_barnes_recursion():
    assert M.barnes_g(1.0) == 1.0
    for z in np.arange(0.5, 20.01, 0.5):
        lhs = M.log_barnes_g(z + 1)
        rhs = math.lgamma(z) + M.log_barnes_g(z)
        assert abs(math.expm1(lhs - rhs)) < 1e-10


def test_limit_ratio_values():
    for k, exact in [(1, Fraction(1, 1)), (2, Fraction(2, 24)), (3, Fraction(42, 362880))]:
        assert M.limit_ratio_U_integer(k) == exact
        assert M.limit_ratio_U(k) == pytest.approx(float(exact), rel=1e-10)
    for k in range(1, 7):
        assert M.limit_ratio_U(k) == pytest.approx(float(M.limit_ratio_U_integer(k)), rel=1e-10)


def test_moment_u_normalized_limit():
    assert abs(M.moment_U(10_000, 1) / 10_000 - M.limit_ratio_U(1)) < 1e-3


def test_g_k_values():
    assert [M.g_k(k) for k in (1, 2, 3, 4)] == [1, 2, 42, 24024]
    assert all(isinstance(M.g_k(k), int) for k in range(1, 13))
    for k in range(1, 7):
        assert M.g_k(k) == pytest.approx(math.gamma(1 + k * k) * M.limit_ratio_U(k), rel=1e-9)


def test_selberg_beta_case():
    a, b = 1.7, 0.6
    closed = 2 ** (a + b - 1) * math.gamma(a) * math.gamma(b) / math.gamma(a + b)
    assert M.selberg(1, a, b, 0.4) == pytest.approx(closed, rel=1e-12)
    quad = integrate.quad(lambda x: M.selberg_integrand([x], a, b, 0.4), -1, 1)[0]
    assert M.selberg(1, a, b, 0.4) == pytest.approx(quad, rel=1e-8)


def test_selberg_two_dim():
    quad = integrate.dblquad(lambda y, x: M.selberg_integrand([x, y], 1, 1, 1), -1, 1, -1, 1,
                             epsabs=1e-13, epsrel=1e-12)[0]
    assert abs(M.selberg(2, 1, 1, 1) / quad - 1) < 1e-8


def test_selberg_uncoupled():
    a, b = 1.5, 2.5
    one = M.selberg(1, a, b, 0.0)
    assert M.selberg(2, a, b, 0.0) == pytest.approx(one ** 2, rel=1e-12)
    with pytest.raises(ValueError):
        M.selberg(2, -1.0, 1.0, 1.0)


def test_mc_u1():
    est, se = M.mc_moment(SymmetryClass(Group.UNITARY, 1), 1, count=10_000)
    assert abs(est - 2.0) < 3 * se


def test_mc_rotation_invariance():
    cls = SymmetryClass(Group.UNITARY, 20)
    a, sa = M.mc_moment(cls, 1, x=0.0, count=2000, seed=3)
    b, sb = M.mc_moment(cls, 1, x=2.0, count=2000, seed=3)
    assert abs(a - b) < 3 * math.hypot(sa, sb)


def test_mc_usp4():
    est, se = M.mc_moment(SymmetryClass(Group.USP, 4), 1, count=10_000)
    assert abs(est - M.moment_Sp(4, 1)) < 3 * se


def test_mc_so4():
    est, se = M.mc_moment(SymmetryClass(Group.SO_EVEN, 4), 2, count=10_000)
    assert abs(est - M.moment_SO_even(4, 2)) < 3 * se


@pytest.mark.slow
def test_mc_u20_fourth_power_theoretical_error():
    # the 4th power is heavy tailed; use the exact variance from the closed forms
    est, _ = M.mc_moment(SymmetryClass(Group.UNITARY, 20), 2, count=10_000)
    exact = M.moment_U(20, 2)
    se = math.sqrt((M.moment_U(20, 4) - exact ** 2) / 10_000)
    assert abs(est - exact) < 3 * se


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="sample stderr underestimates a heavy-tailed mean "
                                       "(z = -3.25 at seed 0)")
def test_mc_u20_fourth_power_sample_error():
    est, se = M.mc_moment(SymmetryClass(Group.UNITARY, 20), 2, count=10_000)
    assert abs(est - M.moment_U(20, 2)) < 3 * se


def test_mc_count_guard():
    with pytest.raises(ValueError):
        M.mc_moment(SymmetryClass(Group.UNITARY, 2), 1, count=50)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.floats(-0.45, 4.0))
def test_moment_u_positive_and_matches_mpmath(N, s):
    val = M.moment_U(N, s)
    assert val > 0
    with mpmath.workdps(30):
        ref = mpmath.fprod(mpmath.gamma(j) * mpmath.gamma(j + 2 * s) / mpmath.gamma(j + s) ** 2
                           for j in range(1, N + 1))
    assert val == pytest.approx(float(ref), rel=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20), st.floats(-0.45, 3.0))
def test_sp_so_positive(n, s):
    assert M.moment_Sp(2 * n, s) > 0
    assert M.moment_SO_even(2 * n, s) > 0
