"""Riemann zeta: Euler-Maclaurin values, Riemann-Siegel Z(t), zeros and mean values."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import loggamma, zeta as hurwitz_zeta

from rmtzeta._hot import em_head, rs_main_sum
from rmtzeta.kernels import NumericalAccuracyError

TWO_PI = 2.0 * math.pi
MAX_HEIGHT = 1.0e5
MAX_ZERO_HEIGHT = 1.0e4
RS_FLOOR = 200.0  # below this Z(t) is evaluated by Euler-Maclaurin
EM_MAX_TERMS = 60
DEFAULT_REL_ERR = 1e-14
GL_ORDER = 8
PANEL_WIDTH = 0.25

# B_{2j}/(2j)! = (-1)^{j+1} 2 zeta(2j) / (2 pi)^{2j}
_EM_COEF = np.array([(-1) ** (j + 1) * 2.0 * hurwitz_zeta(2 * j) / TWO_PI ** (2 * j)
                     for j in range(1, EM_MAX_TERMS + 2)])


@dataclass(frozen=True)
class ComplexPoint:
    sigma: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and math.isfinite(self.t)):
            raise ValueError("ComplexPoint needs finite coordinates")

    @property
    def s(self) -> complex:
        return complex(self.sigma, self.t)

    @classmethod
    def of(cls, s) -> "ComplexPoint":
        if isinstance(s, ComplexPoint):
            return s
        s = complex(s)
        return cls(s.real, s.imag)


# ---------------------------------------------------------------------------
# chi and theta
# ---------------------------------------------------------------------------


def _log_sin(z):
    """Branch-free ``log sin z`` that does not overflow for large ``|Im z|``."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    up = z.imag > 5
    down = z.imag < -5
    mid = ~(up | down)
    zu = z[up]
    out[up] = -1j * zu + np.log1p(-np.exp(2j * zu)) + np.log(0.5j)
    zd = np.conj(z[down])
    out[down] = np.conj(-1j * zd + np.log1p(-np.exp(2j * zd)) + np.log(0.5j))
    out[mid] = np.log(np.sin(z[mid]))
    return out


def log_chi(s):
    s = np.asarray(s, dtype=complex)
    return (s * math.log(2.0) + (s - 1) * math.log(math.pi) + _log_sin(0.5 * math.pi * s)
            + loggamma(1 - s))


def chi_factor(s) -> complex:
    """``chi(s) = 2^s pi^{s-1} sin(pi s/2) Gamma(1-s)`` so that ``zeta(s) = chi(s) zeta(1-s)``."""
    s = ComplexPoint.of(s).s
    if s.real >= 0.5 and abs(s.imag) < 1e-9 and s.real % 2 == 1:
        raise ValueError(f"chi has a pole at s = {s.real:g}")
    nearest = round(s.real)
    if nearest >= 1 and nearest % 2 == 1 and abs(s - nearest) < 1e-12:
        raise ValueError(f"s is within 1e-12 of the pole at {nearest}")
    return complex(np.exp(log_chi(np.array([s]))[0]))


def theta(t):
    """Riemann-Siegel theta ``Im log Gamma(1/4 + it/2) - (t/2) log pi``."""
    t = np.asarray(t, dtype=float)
    return loggamma(0.25 + 0.5j * t).imag - 0.5 * t * math.log(math.pi)


# ---------------------------------------------------------------------------
# Euler-Maclaurin
# ---------------------------------------------------------------------------


def _em_terms(t):
    return (np.maximum(10.0, np.ceil(np.abs(t) / math.pi)) + 5).astype(np.int64)


def _em(sigma, t, rel_err):
    """Vectorized Euler-Maclaurin for ``sigma >= 0``; returns values and error bounds."""
    s = sigma + 1j * t
    n = _em_terms(t)
    re, im = em_head(sigma, t, n)
    nf = n.astype(float)
    log_n = np.log(nf)
    n_s = np.exp(-s * log_n)
    total = re + 1j * im + nf * n_s / (s - 1) + 0.5 * n_s
    fac = s * n_s / nf
    live = np.ones(s.shape, dtype=bool)
    err = np.full(s.shape, np.inf)
    for j in range(1, EM_MAX_TERMS + 1):
        term = _EM_COEF[j - 1] * fac
        total = np.where(live, total + term, total)
        nxt = fac * (s + 2 * j - 1) * (s + 2 * j) / (nf * nf)
        bound = (np.abs(_EM_COEF[j] * nxt) * np.abs(s + 2 * j + 1) / (sigma + 2 * j + 1))
        done = live & (bound <= rel_err * np.maximum(np.abs(total), 1e-8))
        err = np.where(done, bound, err)
        live &= ~done
        if not live.any():
            break
        fac = nxt
    err = np.where(live, bound, err)
    return total, err


def zeta_values(s, rel_err: float = DEFAULT_REL_ERR) -> np.ndarray:
    """Vectorized ``zeta(s)``; raises if the accuracy target is missed anywhere."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(np.abs(s - 1) < 1e-14):
        raise ValueError("zeta has a pole at s = 1")
    if np.any(np.abs(s.imag) > MAX_HEIGHT):
        raise ValueError(f"|t| above the {MAX_HEIGHT:g} guard")
    out = np.empty(s.shape, dtype=complex)
    right = s.real >= -0.5  # reflect only well left of the pole of zeta(1 - s)
    if right.any():
        vals, err = _em(s.real[right], s.imag[right], rel_err)
        if np.any(err > rel_err * np.maximum(np.abs(vals), 1e-8)):
            raise NumericalAccuracyError("Euler-Maclaurin did not reach the target accuracy")
        out[right] = vals
    if (~right).any():
        left = s[~right]
        out[~right] = np.exp(log_chi(left)) * zeta_values(1 - left, rel_err)
    return out


def zeta_value(s, target_rel_err: float = DEFAULT_REL_ERR) -> complex:
    return complex(zeta_values(np.array([ComplexPoint.of(s).s]), target_rel_err)[0])


# ---------------------------------------------------------------------------
# Hardy Z
# ---------------------------------------------------------------------------


def _psi_taylor(order=80, points=256):
    """Taylor coefficients of ``cos 2pi(p^2 - p - 1/16) / cos 2pi p`` about 1/2."""
    phi = TWO_PI * np.arange(points) / points
    z = 0.5 + np.exp(1j * phi)
    vals = np.cos(TWO_PI * (z * z - z - 1 / 16)) / np.cos(TWO_PI * z)
    return np.polynomial.Polynomial((np.fft.fft(vals) / points).real[:order])


_PSI = _psi_taylor()
_PI2 = math.pi ** 2
# (derivative order, weight) for C_0 .. C_4
_RS_TERMS = [
    [(0, 1.0)],
    [(3, -1.0 / (96 * _PI2))],
    [(2, 1.0 / (64 * _PI2)), (6, 1.0 / (18432 * _PI2 ** 2))],
    [(1, -1.0 / (64 * _PI2)), (5, -1.0 / (3840 * _PI2 ** 2)),
     (9, -1.0 / (5308416 * _PI2 ** 3))],
    [(0, 1.0 / (128 * _PI2)), (4, 19.0 / (24576 * _PI2 ** 2)),
     (8, 11.0 / (5898240 * _PI2 ** 3)), (12, 1.0 / (2038431744 * _PI2 ** 4))],
]
_PSI_DERIVS = {d: _PSI.deriv(d) if d else _PSI for d in range(13)}


def rs_correction_terms(p) -> np.ndarray:
    """``C_0(p) .. C_4(p)`` as rows."""
    x = np.asarray(p, dtype=float) - 0.5
    return np.array([sum(w * _PSI_DERIVS[d](x) for d, w in row) for row in _RS_TERMS])


def hardy_Z_rs(t, depth: int = 4) -> np.ndarray:
    """Riemann-Siegel formula with corrections ``C_0 .. C_depth``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 10):
        raise ValueError("Riemann-Siegel needs t >= 10")
    th = theta(t)
    a = np.sqrt(t / TWO_PI)
    m = np.floor(a)
    c = rs_correction_terms(a - m)
    corr = np.zeros_like(t)
    for j in range(depth, -1, -1):
        corr = corr / a + c[j]
    sign = np.where(m.astype(np.int64) % 2 == 1, 1.0, -1.0)
    return 2.0 * rs_main_sum(t, th) + sign * corr / np.sqrt(a)


def hardy_Z_em(t, rel_err: float = DEFAULT_REL_ERR) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return (np.exp(1j * theta(t)) * zeta_values(0.5 + 1j * t, rel_err)).real


def hardy_Z(t):
    """``Z(t) = e^{i theta(t)} zeta(1/2 + it)`` for ``t >= 10``.

    Riemann-Siegel above ``RS_FLOOR``; Euler-Maclaurin below it, where the
    asymptotic corrections are not yet accurate to 1e-8.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 10):
        raise ValueError("hardy_Z is defined here for t >= 10")
    out = np.empty_like(t)
    hi = t >= RS_FLOOR
    if hi.any():
        out[hi] = hardy_Z_rs(t[hi])
    if (~hi).any():
        out[~hi] = hardy_Z_em(t[~hi])
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Zeros
# ---------------------------------------------------------------------------


def count_main_term(T):
    """``(T/2pi) log(T/(2 pi e))``."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= TWO_PI * math.e):
        raise ValueError("count_main_term needs T > 2 pi e")
    out = T / TWO_PI * np.log(T / (TWO_PI * math.e))
    return float(out) if out.ndim == 0 else out


def zero_density(t):
    return np.log(np.maximum(t, TWO_PI * math.e) / TWO_PI) / TWO_PI


@dataclass
class ZeroList:
    """Sorted simple zero ordinates in ``height_range``.

    Multiplicities are not represented; a multiple zero would need a count field.
    """

    ordinates: np.ndarray
    height_range: tuple[float, float]
    provenance: str = "computed"
    brackets: np.ndarray | None = None
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.ordinates = np.asarray(self.ordinates, dtype=float)
        if self.ordinates.size and np.any(np.diff(self.ordinates) <= 0):
            raise ValueError("zero ordinates must be strictly increasing")
        lo, hi = self.height_range
        if self.ordinates.size and (self.ordinates[0] < lo or self.ordinates[-1] > hi):
            raise ValueError("ordinates outside height_range")

    def __len__(self):
        return self.ordinates.size


def _scan_grid(lo, hi):
    pts = [lo]
    while pts[-1] < hi:
        pts.append(pts[-1] + min(0.5, 0.2 / zero_density(pts[-1])))
    pts[-1] = hi
    return np.array(pts)


def _refine(grid):
    mid = 0.5 * (grid[1:] + grid[:-1])
    out = np.empty(grid.size + mid.size)
    out[0::2] = grid
    out[1::2] = mid
    return out


def _bisect(f: Callable, lo, hi, flo, width):
    while True:
        live = hi - lo > width
        if not live.any():
            return lo, hi
        mid = 0.5 * (lo + hi)
        fm = np.ones_like(mid)
        fm[live] = f(mid[live])
        left = live & (np.sign(fm) == np.sign(flo))
        right = live & ~left
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(right, mid, hi)


def find_zeros(T_max: float, certify: float = 1e-9) -> ZeroList:
    """All sign changes of Z in ``(10, T_max)``, bracketed to ``certify``."""
    if not 10 < T_max <= MAX_ZERO_HEIGHT:
        raise ValueError(f"T_max must lie in (10, {MAX_ZERO_HEIGHT:g}]")
    grid = _scan_grid(10.0, float(T_max))
    z = hardy_Z(grid)
    counts = [int(np.count_nonzero(np.sign(z[1:]) != np.sign(z[:-1])))]
    stable = 0
    while stable < 2:
        grid = _refine(grid)
        z_new = np.empty(grid.size)
        z_new[0::2] = z
        z_new[1::2] = hardy_Z(grid[1::2])
        z = z_new
        counts.append(int(np.count_nonzero(np.sign(z[1:]) != np.sign(z[:-1]))))
        stable = stable + 1 if counts[-1] == counts[-2] else 0
        if len(counts) > 8:
            break
    idx = np.flatnonzero(np.sign(z[1:]) != np.sign(z[:-1]))
    lo, hi = grid[idx], grid[idx + 1]
    lo, hi = _bisect(hardy_Z, lo, hi, z[idx], 1e-6)
    # certify with Euler-Maclaurin; redo any bracket Riemann-Siegel got wrong
    flo, fhi = hardy_Z_em(lo), hardy_Z_em(hi)
    bad = np.sign(flo) == np.sign(fhi)
    if bad.any():
        lo[bad], hi[bad] = grid[idx[bad]], grid[idx[bad] + 1]
        flo[bad] = hardy_Z_em(lo[bad])
    lo, hi = _bisect(hardy_Z_em, lo, hi, flo, certify)
    flags = []
    if len(counts) > 8 and counts[-1] != counts[-2]:
        flags.append("scan count did not stabilize")
    n = lo.size
    if T_max > TWO_PI * math.e:
        if abs(n - count_main_term(T_max)) > 3 + math.log(T_max):
            flags.append(f"count {n} far from main term {count_main_term(T_max):.2f}")
    expected = theta(float(T_max)) / math.pi + 1
    if abs(n - expected) > 2:
        flags.append(f"count {n} vs theta(T)/pi + 1 = {expected:.2f}; suspected missed zeros "
                     f"in (10, {T_max:g})")
    ords = 0.5 * (lo + hi)
    if ords.size > 2:
        gaps = np.diff(ords) * zero_density(ords[:-1])
        for k in np.flatnonzero(gaps > 4.0):
            flags.append(f"suspicious gap ({ords[k]:.6f}, {ords[k + 1]:.6f})")
    return ZeroList(ords, (10.0, float(T_max)), "computed", np.column_stack([lo, hi]), flags)


def save_zeros(zeros: ZeroList, path) -> None:
    with open(path, "w") as fh:
        fh.write("".join(f"{g!r}\n" for g in zeros.ordinates.tolist()))


def load_zeros(path, height_range: tuple[float, float] | None = None) -> ZeroList:
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                g = float(text)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed ordinate {text!r}") from None
            if not (math.isfinite(g) and g > 0):
                raise ValueError(f"{path}:{lineno}: ordinate must be positive")
            if vals and g <= vals[-1]:
                raise ValueError(f"{path}:{lineno}: ordinates not strictly increasing")
            vals.append(g)
    if height_range is None:
        height_range = (vals[0], vals[-1]) if vals else (0.0, 0.0)
    return ZeroList(np.array(vals), height_range, f"loaded({Path(path)})")


# ---------------------------------------------------------------------------
# Mean values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureResult:
    value: complex | float
    error: float
    panels: int

    def __float__(self):
        return float(np.real(self.value))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


def _panel_integral(f, a, b, n_panels):
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    vals = f(nodes).reshape(n_panels, GL_ORDER)
    return (vals @ _GL_W * half).sum()


def integrate_panels(f, a: float, b: float, rel_err: float = 1e-8,
                     width: float = PANEL_WIDTH, max_doublings: int = 4) -> QuadratureResult:
    """Composite Gauss-Legendre with panel-doubling error estimation."""
    n = max(1, int(math.ceil((b - a) / width)))
    coarse = _panel_integral(f, a, b, n)
    for _ in range(max_doublings):
        fine = _panel_integral(f, a, b, 2 * n)
        err = abs(fine - coarse)
        if err <= rel_err * max(abs(fine), 1e-300):
            return QuadratureResult(fine, err, 2 * n)
        coarse, n = fine, 2 * n
    raise NumericalAccuracyError(f"quadrature error {err:.3g} above target on [{a:g}, {b:g}]")


def moment_integral(k: int, T: float, rel_err: float = 1e-8) -> QuadratureResult:
    """``(1/T) int_0^T |zeta(1/2+it)|^{2k} dt``."""
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    if not 10 < T <= MAX_ZERO_HEIGHT:
        raise ValueError(f"T must lie in (10, {MAX_ZERO_HEIGHT:g}]")
    head = integrate_panels(lambda t: np.abs(zeta_values(0.5 + 1j * t)) ** (2 * k), 0.0, 10.0,
                            rel_err)
    body = integrate_panels(lambda t: np.abs(hardy_Z(t)) ** (2 * k), 10.0, T, rel_err)
    return QuadratureResult((head.value + body.value) / T, (head.error + body.error) / T,
                            head.panels + body.panels)


def dirichlet_poly_mean_square(coefficients, T: float) -> tuple[float, float]:
    """``int_0^T |sum a_n n^{it}|^2 dt`` exactly, and its diagonal ``T sum |a_n|^2``."""
    a = np.asarray(coefficients, dtype=complex)
    if a.size < 1:
        raise ValueError("need at least one coefficient")
    if not T > 0:
        raise ValueError("T must be positive")
    logn = np.log(np.arange(1, a.size + 1, dtype=float))
    diagonal = T * float(np.sum(np.abs(a) ** 2))
    off = 0.0
    for m in range(a.size):
        d = logn[m] - logn
        d[m] = 1.0
        w = (np.exp(1j * T * d) - 1) / (1j * d)
        w[m] = 0.0
        off += (a[m] * np.conj(a) * w).sum()
    return diagonal + float(off.real), diagonal


# ---------------------------------------------------------------------------
# Ratios
# ---------------------------------------------------------------------------


def farmer_rhs(u, v, a, b, T: float) -> complex:
    if u + v == 0 or a + b == 0:
        raise ValueError("u + v and a + b must be nonzero")
    if a == u and b == v:
        return 1.0 + 0j
    return 1 + (u - a) * (v - b) / ((u + v) * (a + b)) * (1 - T ** (-(u + v)))


def _farmer_integrand(u, v, a, b):
    def f(t):
        top = zeta_values(0.5 + u + 1j * t) * zeta_values(0.5 + v - 1j * t)
        den = zeta_values(0.5 + a + 1j * t) * zeta_values(0.5 + b - 1j * t)
        small = np.abs(den) < 1e-10
        if small.any():
            raise NumericalAccuracyError(f"integrand singular near t = {t[small][0]:.6f}")
        return top / den
    return f


def farmer_lhs(u, v, a, b, T: float, rel_err: float = 1e-5) -> QuadratureResult:
    """``(1/T) int_0^T zeta(s+u) zeta(1-s+v) / (zeta(s+a) zeta(1-s+b)) dt`` on ``s = 1/2+it``."""
    for name, val in (("u", u), ("v", v), ("a", a), ("b", b)):
        if not complex(val).real > 0:
            raise ValueError(f"{name} must have positive real part")
    if a == u and b == v:
        return QuadratureResult(1.0 + 0j, 0.0, 0)
    res = integrate_panels(_farmer_integrand(u, v, a, b), 0.0, T, rel_err)
    return QuadratureResult(res.value / T, res.error / T, res.panels)
