"""Divisor functions, certified Euler products and moment-conjecture assembly.

Euler products are computed as ``exp(sum_{p<=P} log f(1/p))`` plus a tail
correction ``sum_{m>=2} l_m sum_{p>P} p^-m`` where ``l_m`` are the exact
power-series coefficients of ``log f`` and the prime tails come from the
prime zeta function.  ``tail_bound`` certifies what is left.  The plain
truncated product and its ``p^-2`` comparison bound are kept alongside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import zetac

from rmtzeta.moments import g_k

EPS = np.finfo(float).eps
SERIES_ORDER = 40
ACCEL_ORDER = 12
MAX_FACTOR_N = 10 ** 12
ZETA2 = math.pi ** 2 / 6


# ---------------------------------------------------------------------------
# Integers
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(n ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return np.flatnonzero(sieve).astype(np.int64)


def factorize(n: int) -> dict[int, int]:
    if n < 1:
        raise ValueError("n must be positive")
    if n > MAX_FACTOR_N:
        raise OverflowError(f"refusing to factor n={n} > {MAX_FACTOR_N}")
    out = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def d_k(k: int, n: int) -> int:
    """Coefficient of ``n^-s`` in ``zeta(s)^k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = 1
    for _, j in factorize(n).items():
        out *= math.comb(k + j - 1, j)
    return out


# ---------------------------------------------------------------------------
# Exact power series in x = 1/p
# ---------------------------------------------------------------------------


def _mul(a: Sequence, b: Sequence, order: int) -> list:
    out = [0] * (order + 1)
    for i, ai in enumerate(a[:order + 1]):
        if ai == 0:
            continue
        for j, bj in enumerate(b[:order + 1 - i]):
            out[i + j] += ai * bj
    return out


def _binomial_power(c: int, order: int, sign: int = -1) -> list:
    """Coefficients of ``(1 + sign*x)^c`` for integer ``c`` (may be negative)."""
    out = [Fraction(1)]
    for m in range(1, order + 1):
        out.append(out[-1] * (c - m + 1) / m * sign)
    return [int(v) if v.denominator == 1 else v for v in out]


def series_log(f: Sequence, order: int) -> list:
    """Coefficients of ``log f`` for a series with ``f[0] == 1``."""
    if f[0] != 1:
        raise ValueError("series must start with 1")
    f = [Fraction(v) for v in f] + [Fraction(0)] * max(0, order + 1 - len(f))
    ell = [Fraction(0)] * (order + 1)
    for m in range(1, order + 1):
        acc = m * f[m]
        for i in range(1, m):
            acc -= i * ell[i] * f[m - i]
        ell[m] = acc / m
    return ell


def zeta_local_series(k: int, order: int = SERIES_ORDER) -> list:
    inner = [math.comb(k + j - 1, j) ** 2 for j in range(order + 1)]
    return _mul(_binomial_power(k * k, order), inner, order)


def quadratic_local_series(k: int, order: int = SERIES_ORDER) -> list:
    big_k = k * (k + 1) // 2
    inner = [math.comb(k + 2 * m - 1, 2 * m) for m in range(order + 1)]
    inner[0] = 1
    if order >= 1:
        inner[1] += 1
    s = _mul(_binomial_power(big_k, order), _binomial_power(-1, order, sign=1), order)
    return _mul(s, inner, order)


HECKE_POLYNOMIALS = {
    2: [1, 0, 1],
    3: _mul([1, -1], [1, 1, 4, 1, 1], 6),
    4: _mul(_binomial_power(3, 3), [1, 3, 11, 10, 11, 3, 1], 9),
}
HECKE_ZETA2_POWER = {1: 1, 2: 2, 3: 3, 4: 5}


# ---------------------------------------------------------------------------
# Prime zeta tails
# ---------------------------------------------------------------------------


def _mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


@lru_cache(maxsize=64)
def prime_zeta(m: int) -> float:
    """``sum_p p^-m`` for integer ``m >= 2`` via Mobius inversion of log zeta."""
    if m < 2:
        raise ValueError("prime zeta needs m >= 2")
    terms = []
    n = 1
    while True:
        mu = _mobius(n)
        if mu:
            terms.append(mu / n * math.log1p(zetac(m * n)))
        if m * n * math.log(2) > 45:
            break
        n += 1
    return math.fsum(terms)


def prime_tail(m: int, P: int) -> float:
    """``sum_{p > P} p^-m``."""
    head = math.fsum((primes_up_to(P).astype(float) ** -m).tolist())
    return max(prime_zeta(m) - head, 0.0)


# ---------------------------------------------------------------------------
# Certified Euler products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EulerProductResult:
    value: float
    prime_cutoff: int
    tail_bound: float
    family: str
    truncated_value: float
    truncated_tail_bound: float

    def brackets(self, other: float) -> bool:
        return abs(other - self.value) <= self.tail_bound


def _coefficient_growth(ell: Sequence[Fraction]) -> float:
    tail = [abs(float(v)) ** (1.0 / m) for m, v in enumerate(ell) if m >= len(ell) - 10 and v]
    return 2.0 * max(tail, default=1.0) + 1.0


def euler_product(log_local: Callable[[np.ndarray], np.ndarray], series: Sequence,
                  P: int, family: str, linear_scale: float = 1.0) -> EulerProductResult:
    """Certified ``prod_p f(1/p)`` for a local factor ``f = 1 + O(x^2)``.

    ``log_local`` evaluates ``log f(1/p)`` on an array of primes; ``series``
    holds exact coefficients of ``f`` in ``x = 1/p``.
    """
    if P < 2:
        raise ValueError("prime cutoff must be >= 2")
    ell = series_log(series, SERIES_ORDER)
    if ell[1] != 0:
        raise ValueError("local factor is not 1 + O(p^-2); the product diverges")
    primes = primes_up_to(P)
    logs = log_local(primes)
    head = math.fsum(logs.tolist())

    rho = _coefficient_growth(ell)
    if rho >= P:
        raise ValueError(f"prime cutoff {P} too small for this local factor")
    # |l_m| <= rho^m beyond the exact range; geometric sums in log space
    m0 = SERIES_ORDER + 1
    log_q = math.log(rho / P)
    geo = math.exp(m0 * log_q) / -math.expm1(log_q)

    inv_p = 1.0 / P
    c2 = (math.fsum(abs(float(ell[m])) * inv_p ** (m - 2) for m in range(2, SERIES_ORDER + 1))
          + P * P * geo)
    # log1p cancellation costs ~eps * linear_scale / p per prime; each summand
    # is then rounded relative to its own size
    rounding = (8 * EPS * linear_scale * (math.log(math.log(max(P, 3))) + 1.0)
                + EPS * (math.fsum(np.abs(logs).tolist()) + 1.0))
    truncated = math.exp(head)
    truncated_bound = truncated * math.expm1(c2 * inv_p + rounding)

    tail = math.fsum(float(ell[m]) * prime_tail(m, P) for m in range(2, ACCEL_ORDER + 1))
    remainder = (math.fsum(abs(float(ell[m])) * P ** (1.0 - m) / (m - 1)
                           for m in range(ACCEL_ORDER + 1, SERIES_ORDER + 1))
                 + P * geo / (m0 - 1))
    pz_err = 4 * EPS * math.fsum(abs(float(ell[m])) * prime_zeta(m) for m in range(2, ACCEL_ORDER + 1))
    value = math.exp(head + tail)
    bound = value * math.expm1(remainder + rounding + pz_err)
    return EulerProductResult(value, int(P), bound, family, truncated, truncated_bound)


def _zeta_log_local(k: int):
    def log_local(p):
        x = 1.0 / p.astype(float)
        acc = np.zeros_like(x)
        term = np.ones_like(x)
        j = 0
        while True:
            j += 1
            term = term * ((k + j - 1) / j) ** 2 * x
            acc += term
            ratio = ((k + j) / (j + 1)) ** 2 * x
            if np.all(ratio < 1) and np.all(term * ratio / (1 - ratio) <= 1e-16 * (1 + acc)):
                break
            if j > 5000:
                raise ArithmeticError("inner divisor series failed to converge")
        return k * k * np.log1p(-x) + np.log1p(acc)
    return log_local


def a_k_zeta(k: int, P: int = 100_000) -> EulerProductResult:
    """Arithmetic factor ``prod_p (1-1/p)^{k^2} sum_j d_k(p^j)^2 p^-j``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if P < 1000:
        raise ValueError("prime cutoff must be >= 1000")
    return euler_product(_zeta_log_local(k), zeta_local_series(k), P, f"zeta k={k}",
                         linear_scale=k * k)


def quadratic_log_local(k: int):
    big_k = k * (k + 1) // 2

    def log_local(p):
        x = 1.0 / p.astype(float)
        y = np.sqrt(x)
        bracket = 0.5 * (np.expm1(-k * np.log1p(-y)) + np.expm1(-k * np.log1p(y))) + x
        return big_k * np.log1p(-x) - np.log1p(x) + np.log1p(bracket)
    return log_local


def a_k_quadratic(k: int, P: int = 100_000) -> EulerProductResult:
    """Arithmetic factor of the quadratic-character family."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if P < 1000:
        raise ValueError("prime cutoff must be >= 1000")
    if k == 0:
        return EulerProductResult(1.0, int(P), 0.0, "quadratic k=0", 1.0, 0.0)
    return euler_product(quadratic_log_local(k), quadratic_local_series(k), P,
                         f"quadratic k={k}", linear_scale=k * k + 2)


def _polynomial_log_local(poly):
    coeffs = [float(c) for c in poly]

    def log_local(p):
        x = 1.0 / p.astype(float)
        acc = np.zeros_like(x)
        for m in range(len(coeffs) - 1, 1, -1):
            acc = (acc + coeffs[m]) * x
        return np.log1p(acc * x)
    return log_local


def a_hecke_result(k: int, P: int = 100_000) -> EulerProductResult:
    if k not in (1, 2, 3, 4):
        raise ValueError("a_k for the weight-2 family is tabulated only for k = 1..4")
    if k == 1:
        return EulerProductResult(ZETA2, int(P), 0.0, "hecke k=1", ZETA2, 0.0)
    poly = HECKE_POLYNOMIALS[k]
    if poly[1] != 0:
        raise ArithmeticError("local polynomial has a linear term")
    ep = euler_product(_polynomial_log_local(poly), poly, P, f"hecke k={k}",
                       linear_scale=sum(abs(c) for c in poly))
    scale = ZETA2 ** HECKE_ZETA2_POWER[k]
    return EulerProductResult(scale * ep.value, ep.prime_cutoff, scale * ep.tail_bound,
                              ep.family, scale * ep.truncated_value,
                              scale * ep.truncated_tail_bound)


def a_hecke(k: int, P: int = 100_000) -> float:
    return a_hecke_result(k, P).value


# ---------------------------------------------------------------------------
# Conjecture assembly (exact rational coefficients)
# ---------------------------------------------------------------------------


def zeta_coefficient(k: int) -> Fraction:
    """``g_k / Gamma(1 + k^2)``."""
    return Fraction(g_k(k), math.factorial(k * k))


def quadratic_coefficient(k: int) -> Fraction:
    """``prod_{l=1}^k l!/(2l)!``."""
    out = Fraction(1)
    for ell in range(1, k + 1):
        out *= Fraction(math.factorial(ell), math.factorial(2 * ell))
    return out


def hecke_coefficient(k: int) -> Fraction:
    """``2^{k-1} prod_{l=1}^{k-1} l!/(2l)!``."""
    return 2 ** (k - 1) * quadratic_coefficient(k - 1)


def half_log_form(factor: int, power: int) -> Fraction:
    """Coefficient of ``log^power X`` in ``factor * log^power(X^{1/2}) / power!``."""
    return Fraction(factor, 2 ** power * math.factorial(power))


def _check_log_arg(x, floor, name):
    if not x > floor:
        raise ValueError(f"{name} must exceed {floor:.6g}")


def zeta_moment_rhs(k: int, T: float, P: int = 100_000) -> float:
    """``g_k a_k / Gamma(1 + k^2) * log^{k^2} T``."""
    _check_log_arg(T, 2 * math.pi * math.e, "T")
    return float(zeta_coefficient(k)) * a_k_zeta(k, P).value * math.log(T) ** (k * k)


def quadratic_moment_rhs(k: int, D: float, P: int = 100_000) -> float:
    _check_log_arg(D, math.e, "D")
    return (float(quadratic_coefficient(k)) * a_k_quadratic(k, P).value
            * math.log(D) ** (k * (k + 1) // 2))


def hecke_moment_rhs(k: int, q: float, a_k: float | None = None, P: int = 100_000) -> float:
    _check_log_arg(q, math.e, "q")
    if a_k is None:
        if k not in (1, 2, 3, 4):
            raise ValueError(f"no certified a_{k} for this family; pass a_k explicitly")
        a_k = a_hecke(k, P)
    return float(hecke_coefficient(k)) * a_k * math.log(q) ** (k * (k - 1) // 2)


def diagonal_dirichlet_asymptotic(k: int, x: float, P: int = 100_000) -> float:
    """``a_k log^{k^2} x / Gamma(1 + k^2)``."""
    _check_log_arg(x, math.e, "x")
    return a_k_zeta(k, P).value * math.log(x) ** (k * k) / math.factorial(k * k)


@dataclass(frozen=True)
class MomentFamily:
    """A family of L-values with its symmetry type and arithmetic factor."""

    name: str
    symmetry: str
    log_power: Callable[[int], int]
    coefficient: Callable[[int], Fraction]
    arithmetic_factor: Callable[[int, int], float]

    def rhs(self, k: int, X: float, P: int = 100_000) -> float:
        return (float(self.coefficient(k)) * self.arithmetic_factor(k, P)
                * math.log(X) ** self.log_power(k))


FAMILIES = {
    "zeta": MomentFamily("zeta", "U", lambda k: k * k, zeta_coefficient,
                         lambda k, P: a_k_zeta(k, P).value),
    "quadratic": MomentFamily("quadratic", "Sp", lambda k: k * (k + 1) // 2,
                              quadratic_coefficient, lambda k, P: a_k_quadratic(k, P).value),
    "hecke": MomentFamily("hecke", "O", lambda k: k * (k - 1) // 2, hecke_coefficient,
                          lambda k, P: a_hecke(k, P)),
}


def arithmetic_factor(family: str, k: int, P: int = 100_000) -> EulerProductResult:
    if family == "zeta":
        return a_k_zeta(k, P)
    if family == "quadratic":
        return a_k_quadratic(k, P)
    if family == "hecke":
        return a_hecke_result(k, P)
    raise ValueError(f"unknown family {family!r}")
