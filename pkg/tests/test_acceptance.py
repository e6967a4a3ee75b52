"""Acceptance criteria 1-16, each at its stated tolerance.

One PASS/FAIL line per criterion is printed as it runs and again in the
pytest terminal summary.  Run alone with ``pytest tests/test_acceptance.py``.
"""
import functools
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from rmtzeta import arithmetic as A
from rmtzeta import kernels as K
from rmtzeta import moments as M
from rmtzeta import statistics as S
from rmtzeta import zeta as Z
from rmtzeta.ensembles import Group, SymmetryClass, det_minus_identity, sample_angle_batch, weyl_average

RESULTS = []


def criterion(number, title, budget=None):
    """Record PASS/FAIL (and wall time against ``budget`` seconds) for one criterion."""
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                detail = fn(*args, **kwargs) or ""
                elapsed = time.perf_counter() - t0
                if budget is not None:
                    assert elapsed < budget, f"runtime {elapsed:.1f}s over {budget}s"
            except BaseException as exc:
                line = f"FAIL  {number:>2}. {title}: {exc}".splitlines()[0]
                RESULTS.append(line)
                print(line)
                raise
            line = f"PASS  {number:>2}. {title} ({elapsed:.1f}s) {detail}".rstrip()
            RESULTS.append(line)
            print(line)
        return run
    return wrap


@criterion(1, "g_k exact values", budget=1.0)
def test_01_g_k():
    vals = [M.g_k(k) for k in (1, 2, 3, 4)]
    assert vals == [1, 2, 42, 24024], vals
    return f"g_1..g_4 = {vals}"


@criterion(2, "limit ratio values and Barnes path")
def test_02_limit_ratio():
    for k, exact in [(1, Fraction(1, 1)), (2, Fraction(2, 24)), (3, Fraction(42, 362880))]:
        assert abs(M.limit_ratio_U(k) - float(exact)) < 1e-10
    worst = max(abs(M.limit_ratio_U(k) / float(M.limit_ratio_U_integer(k)) - 1)
                for k in range(1, 7))
    assert worst < 1e-10, worst
    return f"max rel diff {worst:.1e}"


@criterion(3, "closed-form moments vs oracles", budget=120.0)
def test_03_moments():
    worst = max(abs(M.moment_U(N, 1) - (N + 1)) / (N + 1) for N in range(1, 51))
    assert worst < 1e-12, worst
    classes = [SymmetryClass(Group.UNITARY, d) for d in (1, 2, 3)] + [
        SymmetryClass(Group.USP, 2), SymmetryClass(Group.SO_EVEN, 2)]
    weyl_err = 0.0
    for cls in classes:
        for s in (1, 2):
            power = 2 * s if cls.group is Group.UNITARY else s
            w = weyl_average(cls, lambda a: det_minus_identity(a) ** power)
            weyl_err = max(weyl_err, abs(M.closed_form_moment(cls, s) / w - 1))
    assert weyl_err < 1e-8, weyl_err
    zs = []
    for cls, s in [(SymmetryClass(Group.UNITARY, 20), 1), (SymmetryClass(Group.USP, 4), 1),
                   (SymmetryClass(Group.SO_EVEN, 4), 2)]:
        est, se = M.mc_moment(cls, s, count=10_000, seed=0)
        z = (est - M.closed_form_moment(cls, s)) / se
        assert abs(z) < 3, (cls.label, s, z)
        zs.append(round(z, 2))
    return f"weyl rel err {weyl_err:.1e}; MC z-scores {zs}"


@criterion(4, "pair correlation U(40)", budget=120.0)
def test_04_pair_correlation(u40_unfolded):
    edges = np.round(np.arange(0.05, 3.0 + 1e-9, 0.1), 10)
    h = S.pair_correlation_histogram(u40_unfolded, edges)
    exact = np.array([integrate.quad(K.pair_correlation_density, a, b)[0] / (b - a)
                      for a, b in zip(edges[:-1], edges[1:])])
    dev = float(np.max(np.abs(h.density - exact)))
    assert dev < 0.05, dev
    return f"max bin deviation {dev:.4f}"


@criterion(5, "spacing universality and normalization")
def test_05_spacing(u40_unfolded, usp40_unfolded):
    ks_u = S.ks_distance(S.pooled_spacings(u40_unfolded), K.spacing_cdf)
    ks_sp = S.ks_distance(S.pooled_spacings(usp40_unfolded), K.spacing_cdf)
    assert ks_u < 0.03 and ks_sp < 0.03, (ks_u, ks_sp)
    x = np.linspace(0.0, 5.0, 501)
    mu = np.array([K.spacing_density(v) for v in x])
    mass = integrate.simpson(mu, x=x)
    mean = integrate.simpson(x * mu, x=x)
    assert abs(mass - 1) < 1e-3 and abs(mean - 1) < 2e-3, (mass, mean)
    return f"KS U {ks_u:.4f}, Sp {ks_sp:.4f}; mass {mass:.5f}, mean {mean:.5f}"


@criterion(6, "symmetry discrimination USp vs SO-even")
def test_06_discrimination(usp40_unfolded, so40_unfolded):
    low = S.ks_two_sample(S.jth_lowest_values(usp40_unfolded), S.jth_lowest_values(so40_unfolded))
    gap = S.ks_two_sample(S.pooled_spacings(usp40_unfolded), S.pooled_spacings(so40_unfolded))
    assert low > 0.15 and gap < 0.03, (low, gap)
    return f"lowest KS {low:.3f}, spacing KS {gap:.4f}"


@criterion(7, "Fredholm identities")
def test_07_fredholm():
    worst_tr = worst_hs = 0.0
    for x in (0.5, 1.0, 2.0):
        lam = K.fredholm_spectrum(x).full
        hs = integrate.dblquad(lambda u, t: np.sinc(t - u) ** 2, -x / 2, x / 2, -x / 2, x / 2,
                               epsabs=1e-12, epsrel=1e-12)[0]
        worst_tr = max(worst_tr, abs(lam.sum() - x))
        worst_hs = max(worst_hs, abs(np.sum(lam ** 2) - hs))
    lam0 = K.fredholm_spectrum(0.01).eigenvalues[0]
    assert worst_tr < 1e-8 and worst_hs < 1e-6 and 0.0099 <= lam0 <= 0.01
    return f"trace err {worst_tr:.1e}, HS err {worst_hs:.1e}, lambda_0(0.01) {lam0:.8f}"


@criterion(8, "one-level formulas vs determinant formulas")
def test_08_kernel_consistency():
    grid = np.linspace(0.0, 3.0, 301)
    worst = 0.0
    for sym in ("U", "Sp", "O+", "O-"):
        smooth, _ = K.one_level_density(sym, grid)
        det = np.array([K.n_level_density(sym, [x])[0] for x in grid])
        worst = max(worst, float(np.max(np.abs(np.broadcast_to(smooth, grid.shape) - det))))
    assert worst < 1e-12, worst
    o, atom = K.one_level_density("O", grid)
    avg = 0.5 * (K.one_level_density("O+", grid)[0] + K.one_level_density("O-", grid)[0])
    assert np.max(np.abs(o - avg)) < 1e-12 and atom == 0.5
    assert K.n_level_density("O", [0.3])[1] == [(0, 0.5)]
    return f"max diff {worst:.1e}"


@criterion(9, "Selberg integral")
def test_09_selberg():
    quad = integrate.dblquad(lambda y, x: M.selberg_integrand([x, y], 1, 1, 1), -1, 1, -1, 1,
                             epsabs=1e-13, epsrel=1e-12)[0]
    rel = abs(M.selberg(2, 1, 1, 1) / quad - 1)
    a, b = 1.3, 2.2
    beta = 2 ** (a + b - 1) * math.gamma(a) * math.gamma(b) / math.gamma(a + b)
    one = abs(M.selberg(1, a, b, 0.7) - beta)
    assert rel < 1e-8 and one < 1e-12, (rel, one)
    return f"n=2 rel err {rel:.1e}; n=1 err {one:.1e}"


@criterion(10, "arithmetic factors")
def test_10_arithmetic():
    a1 = A.a_k_zeta(1, 100_000)
    a2 = A.a_k_zeta(2, 100_000)
    assert abs(a1.value - 1) < 1e-12 and a1.tail_bound < 1e-12
    err = abs(a2.value - 6 / math.pi ** 2)
    assert err < 1e-8 and a2.tail_bound < 1e-8 and a2.brackets(6 / math.pi ** 2)
    ingham = abs(M.g_k(2) * a2.value / 24 - 1 / (2 * math.pi ** 2))
    assert ingham < 1e-9
    return f"a_2 err {err:.1e} (bound {a2.tail_bound:.1e}); Ingham err {ingham:.1e}"


@criterion(11, "conjecture assembly coefficients")
def test_11_assembly():
    for k, factor in zip((1, 2, 3, 4), (1, 2, 16, 768)):
        assert A.quadratic_coefficient(k) == A.half_log_form(factor, k * (k + 1) // 2)
    for k, factor in zip((1, 2, 3, 4), (1, 2, 8, 128)):
        assert A.hecke_coefficient(k) == A.half_log_form(factor, k * (k - 1) // 2)
    assert A.quadratic_coefficient(4) == Fraction(1, 4838400)
    return "exact rational identities hold"


@criterion(12, "zeta zeros to T=200", budget=30.0)
def test_12_zeros():
    zs = Z.find_zeros(200.0)
    diff = abs(len(zs) - Z.count_main_term(200.0))
    assert diff <= 3, diff
    assert 14.10 < zs.ordinates[0] < 14.17
    lo, hi = zs.brackets[:, 0], zs.brackets[:, 1]
    assert np.all(hi - lo <= 1e-9)
    assert np.all(np.sign(Z.hardy_Z_em(lo)) != np.sign(Z.hardy_Z_em(hi)))
    return f"{len(zs)} zeros (main term {Z.count_main_term(200.0):.2f}), first {zs.ordinates[0]:.9f}"


@criterion(13, "zeta moment integrals", budget=600.0)
def test_13_zeta_moments():
    ratios = [float(Z.moment_integral(1, T)) / math.log(T / (2 * math.pi))
              for T in (500.0, 1500.0, 3000.0)]
    assert 0.95 <= ratios[-1] <= 1.10, ratios
    assert abs(ratios[0] - 1) > abs(ratios[1] - 1) > abs(ratios[2] - 1), ratios
    m1 = float(Z.moment_integral(1, 3000.0))
    m2 = float(Z.moment_integral(2, 3000.0))
    r2 = m2 / (math.log(3000.0) ** 4 / (2 * math.pi ** 2))
    assert 0.5 <= r2 <= 3.0 and m2 >= m1 ** 2, (r2, m1, m2)
    return f"k=1 ratios {[round(r, 4) for r in ratios]}; k=2 ratio {r2:.3f}"


@criterion(14, "Montgomery F and Parseval duality")
def test_14_montgomery(zeros_500):
    T = 500.0
    dev = float(np.mean([abs(S.montgomery_F(zeros_500, T, a) - (T ** (-2 * a) + a))
                         for a in (0.3, 0.5, 0.7)]))
    assert dev < 0.35, dev
    r = S.TestFunction.fejer(1, 0.8)
    direct = S.weighted_pair_sum(zeros_500, T, r)
    dual, _ = S.weighted_pair_sum_fourier(zeros_500, T, r)
    rel = abs(direct / dual - 1)
    assert rel < 0.05, rel
    return f"mean |F - model| {dev:.3f}; Parseval rel diff {rel:.1e}"


@criterion(15, "finite-N densities vs U(10) Monte Carlo")
def test_15_gaudin():
    N = 10
    batch = S.unfold_batch(sample_angle_batch(SymmetryClass(Group.UNITARY, N), 0, 10_000))
    edges1 = np.linspace(0.0, 10.0, 21)
    counts = np.histogram(np.concatenate([p.points for p in batch]), edges1)[0]
    one = counts / (len(batch) * np.diff(edges1))
    exact1 = np.array([K.finite_n_level_density(N, [c]) for c in 0.5 * (edges1[1:] + edges1[:-1])])
    dev1 = float(np.max(np.abs(one - exact1)))
    edges2 = np.round(np.linspace(0.0, 3.0, 31), 10)
    h = S.pair_correlation_histogram(batch, edges2)
    exact2 = np.array([integrate.quad(lambda x: float(K.finite_pair_density(N, x)), a, b)[0]
                       / (b - a) for a, b in zip(edges2[:-1], edges2[1:])])
    dev2 = float(np.max(np.abs(h.density - exact2)))
    assert dev1 < 0.05 and dev2 < 0.05, (dev1, dev2)
    return f"one-level sup dev {dev1:.4f}; two-level sup dev {dev2:.4f}"


@criterion(16, "ratio conjecture at desk scale")
def test_16_farmer():
    assert Z.farmer_lhs(0.05, 0.07, 0.05, 0.07, 2000.0).value == 1
    assert Z.farmer_rhs(0.05, 0.07, 0.05, 0.07, 2000.0) == 1
    args = (0.02, 0.03, 0.05, 0.06, 2000.0)
    lhs = complex(Z.farmer_lhs(*args).value)
    rhs = complex(Z.farmer_rhs(*args))
    rel = abs(lhs - rhs) / abs(rhs)
    assert rel < 0.15, rel
    return f"LHS {lhs.real:.5f}{lhs.imag:+.1e}j vs RHS {rhs.real:.5f}; rel diff {rel:.3f}"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
