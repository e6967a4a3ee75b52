"""Characteristic-polynomial moments of U(N), USp(2N), SO(2N), Barnes G and friends."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, poch

from rmtzeta.ensembles import Group, SymmetryClass, char_poly_moduli, sample_angle_batch

# log G(z+1) ~ z^2/2 log z - 3z^2/4 + z/2 log(2 pi) - log(z)/12 + zeta'(-1)
#              + sum_k B_{2k+2} / (4k(k+1) z^{2k})
ZETA_PRIME_MINUS_ONE = -0.16542114370045092921
_BERNOULLI = [Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30), Fraction(5, 66),
              Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510)]  # B4..B16
_ANCHOR = 20.0


def _log_gamma_ratio(a, b):
    """``log(Gamma(a) / Gamma(b))`` for positive a, b."""
    r = poch(b, a - b)
    if np.isfinite(r) and r > 0:
        return math.log(r)
    return float(gammaln(a) - gammaln(b))


def _check_exponent(s):
    if not s > -0.5:
        raise ValueError(f"exponent must exceed -1/2, got {s}")


def moment_U(N: int, s: float) -> float:
    """``E |det(A - I e^{-ix})|^{2s}`` over Haar U(N)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    _check_exponent(s)
    terms = [_log_gamma_ratio(j + 2 * s, j + s) - _log_gamma_ratio(j + s, j)
             for j in range(1, N + 1)]
    return math.exp(math.fsum(terms))


def moment_Sp(twoN: int, s: float) -> float:
    """``E |det(A - I)|^s`` over Haar USp(2N)."""
    if twoN < 2 or twoN % 2:
        raise ValueError("twoN must be an even integer >= 2")
    _check_exponent(s)
    n = twoN // 2
    terms = [_log_gamma_ratio(0.5 + s + j, 0.5 + j) - _log_gamma_ratio(1 + s + n + j, 1 + n + j)
             for j in range(1, n + 1)]
    return math.exp(math.fsum(terms) + 2 * n * s * math.log(2.0))


def moment_SO_even(twoN: int, s: float) -> float:
    """``E |det(A - I)|^s`` over Haar SO(2N)."""
    if twoN < 2 or twoN % 2:
        raise ValueError("twoN must be an even integer >= 2")
    _check_exponent(s)
    n = twoN // 2
    terms = [_log_gamma_ratio(s + j - 0.5, j - 0.5) - _log_gamma_ratio(s + j + n - 1, n + j - 1)
             for j in range(1, n + 1)]
    return math.exp(math.fsum(terms) + 2 * n * s * math.log(2.0))


def closed_form_moment(cls: SymmetryClass, s: float) -> float:
    if cls.group is Group.UNITARY:
        return moment_U(cls.matrix_dim, s)
    if cls.group is Group.USP:
        return moment_Sp(cls.matrix_dim, s)
    if cls.group is Group.SO_EVEN:
        return moment_SO_even(cls.matrix_dim, s)
    raise ValueError(f"no closed form for {cls.label}")


# ---------------------------------------------------------------------------
# Barnes G
# ---------------------------------------------------------------------------


def _log_barnes_asymptotic(z):
    """log G(z + 1) for large z."""
    lz = math.log(z)
    acc = [0.5 * z * z * lz, -0.75 * z * z, 0.5 * z * math.log(2 * math.pi), -lz / 12.0,
           ZETA_PRIME_MINUS_ONE]
    for k, b in enumerate(_BERNOULLI, start=1):
        acc.append(float(b) / (4 * k * (k + 1) * z ** (2 * k)))
    return math.fsum(acc)


def log_barnes_g(z: float) -> float:
    """log G(z) for real z > 0, by recursion down from an asymptotic anchor."""
    if not z > 0:
        raise ValueError("Barnes G implemented for z > 0 only")
    if float(z).is_integer() and z <= 171:
        n = int(z)
        return math.fsum(math.lgamma(j + 1) for j in range(n - 1))
    m = max(0, int(math.ceil(_ANCHOR - z)))
    # G(z + m) = G(z) prod_{i<m} Gamma(z + i)
    top = _log_barnes_asymptotic(z + m - 1.0)
    return top - math.fsum(math.lgamma(z + i) for i in range(m))


def barnes_g(z: float) -> float:
    return math.exp(log_barnes_g(z))


def limit_ratio_U(s: float) -> float:
    """``lim M_U(N, s) / N^{s^2} = G(1+s)^2 / G(1+2s)``."""
    _check_exponent(s)
    return math.exp(2 * log_barnes_g(1 + s) - log_barnes_g(1 + 2 * s))


def limit_ratio_U_integer(k: int) -> Fraction:
    """``prod_{j<k} j!/(j+k)!`` exactly."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = Fraction(1)
    for j in range(k):
        out *= Fraction(math.factorial(j), math.factorial(j + k))
    return out


def g_k(k: int) -> int:
    """Geometric factor ``(k^2)! prod_{j<k} j!/(j+k)!``; always an integer."""
    if k < 1:
        raise ValueError("k must be >= 1")
    val = math.factorial(k * k) * limit_ratio_U_integer(k)
    if val.denominator != 1:
        raise ArithmeticError(f"g_{k} = {val} is not an integer")
    return val.numerator


# ---------------------------------------------------------------------------
# Selberg integral
# ---------------------------------------------------------------------------


def selberg(n: int, alpha: float, beta: float, gamma: float) -> float:
    """Closed form of the Selberg integral over ``[-1, 1]^n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    bound = 1.0 / n if n == 1 else min(1.0 / n, alpha / (n - 1), beta / (n - 1))
    if not gamma > -bound:
        raise ValueError(f"gamma must exceed {-bound}")
    logs = [(gamma * n * (n - 1) + n * (alpha + beta - 1)) * math.log(2.0)]
    for j in range(n):
        logs += [math.lgamma(1 + gamma + j * gamma), math.lgamma(alpha + j * gamma),
                 math.lgamma(beta + j * gamma), -math.lgamma(1 + gamma),
                 -math.lgamma(alpha + beta + gamma * (n + j - 1))]
    return math.exp(math.fsum(logs))


def selberg_integrand(x, alpha, beta, gamma):
    """Left-hand integrand at points ``x`` of shape ``(..., n)``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    out = np.prod((1 - x) ** (alpha - 1) * (1 + x) ** (beta - 1), axis=-1)
    for i in range(n):
        for j in range(i + 1, n):
            out = out * np.abs(x[..., i] - x[..., j]) ** (2 * gamma)
    return out


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def mc_moment(cls: SymmetryClass, s: float, x: float = 0.0, count: int = 10_000,
              seed: int = 0, threads: int = 1) -> tuple[float, float]:
    """Sample mean and standard error of ``|det(A - I e^{-ix})|^p``.

    ``p = 2s`` for U(N) and ``p = s`` for the USp/SO classes, matching the
    closed forms.
    """
    if count < 100:
        raise ValueError("count must be >= 100")
    batch = sample_angle_batch(cls, seed, count, threads=threads)
    power = 2 * s if cls.group is Group.UNITARY else s
    vals = char_poly_moduli(batch, x) ** power
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(count))
