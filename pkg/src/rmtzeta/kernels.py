"""Analytic scaling-limit densities built from the sine kernel.

All abscissae are unfolded (mean spacing one).  Dirac masses never enter a
sampled curve: they are carried separately as ``(location, coefficient)``
atoms.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import cumulative_simpson

SYMMETRIES = ("U", "Sp", "O", "O+", "O-")
_EPSILON = {"U": 0, "Sp": -1, "O+": 1, "O-": -1}

DEFAULT_QUAD_ORDER = 48
DEFAULT_EIGEN_COUNT = 24
DIFF_STEP = 1e-3
DIFF_TOL = 1e-5


class NumericalAccuracyError(ArithmeticError):
    """A numerical self-check (step halving, sanity window) failed."""


def normalize_symmetry(label: str) -> str:
    key = str(label).strip()
    table = {"u": "U", "sp": "Sp", "usp": "Sp", "o": "O", "o+": "O+", "o-": "O-",
             "oplus": "O+", "ominus": "O-", "so-even": "O+", "so-odd": "O-"}
    try:
        return table[key.lower()]
    except KeyError:
        raise ValueError(f"unknown symmetry label {label!r}") from None


@dataclass(frozen=True)
class KernelChoice:
    label: str

    def __post_init__(self):
        lab = normalize_symmetry(self.label)
        if lab == "O":
            raise ValueError("O has no single kernel; it is the average of O+ and O-")
        object.__setattr__(self, "label", lab)

    @property
    def epsilon(self) -> int:
        return _EPSILON[self.label]

    @property
    def has_atoms(self) -> bool:
        return self.label == "O-"


@dataclass
class DensityCurve:
    grid: np.ndarray
    values: np.ndarray
    atoms: list = field(default_factory=list)
    label: str = ""

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape:
            raise ValueError("grid and values differ in length")
        if self.grid.size > 1 and np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("density values must be finite")

    def write(self, csv_path, atoms_path=None):
        with open(csv_path, "w") as fh:
            fh.write("x,smooth_value\n")
            for x, v in zip(self.grid, self.values):
                fh.write(f"{float(x)!r},{float(v)!r}\n")
        if atoms_path is not None:
            with open(atoms_path, "w") as fh:
                json.dump({"label": self.label,
                           "atoms": [[float(a), float(c)] for a, c in self.atoms]}, fh, indent=2)


# ---------------------------------------------------------------------------
# Sine-kernel determinants
# ---------------------------------------------------------------------------


def sinc(x):
    """``sin(pi x) / (pi x)`` with value 1 at 0."""
    return np.sinc(x)


def sine_kernel_entry(choice, xi, xj):
    eps = choice.epsilon if isinstance(choice, KernelChoice) else int(choice)
    return sinc(np.subtract(xi, xj)) + eps * sinc(np.add(xi, xj))


def kernel_matrix(eps: int, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return sinc(x[:, None] - x[None, :]) + eps * sinc(x[:, None] + x[None, :])


def _det(m):
    return 1.0 if m.shape[0] == 0 else float(np.linalg.det(m))


def n_level_density(label, x_vec):
    """Smooth part and atom terms of the n-level density.

    Atoms are ``(m, coefficient)``: a Dirac mass ``delta(x_m)`` times the
    determinant of the kernel with row and column ``m`` removed.  The empty
    minor of a 1 x 1 matrix has determinant 1.
    """
    lab = normalize_symmetry(label)
    x = np.atleast_1d(np.asarray(x_vec, dtype=float))
    if lab == "O":
        sp, ap = n_level_density("O+", x)
        sm, am = n_level_density("O-", x)
        return 0.5 * (sp + sm), [(m, 0.5 * c) for m, c in ap + am]
    eps = _EPSILON[lab]
    k = kernel_matrix(eps, x)
    smooth = _det(k)
    atoms = []
    if lab == "O-":
        for m in range(x.size):
            keep = np.arange(x.size) != m
            atoms.append((m, _det(k[np.ix_(keep, keep)])))
    return smooth, atoms


def one_level_density(symmetry, x):
    """``(smooth, atom_coefficient_at_0)`` of the one-level densities."""
    lab = normalize_symmetry(symmetry)
    x = np.asarray(x, dtype=float)
    s2 = sinc(2.0 * x)
    one = np.ones_like(x)
    smooth = {"U": one, "O": one, "O+": 1.0 + s2, "O-": 1.0 - s2, "Sp": 1.0 - s2}[lab]
    atom = {"U": 0.0, "O": 0.5, "O+": 0.0, "O-": 1.0, "Sp": 0.0}[lab]
    if smooth.ndim == 0:
        smooth = float(smooth)
    return smooth, atom


def pair_correlation_density(x):
    return 1.0 - sinc(np.asarray(x, dtype=float)) ** 2


# ---------------------------------------------------------------------------
# Finite N (Gaudin)
# ---------------------------------------------------------------------------


def jn_kernel(N: int, theta):
    """``sum_{m<N} e(m theta) = e((N-1)theta/2) sin(pi N theta)/sin(pi theta)``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    theta = np.asarray(theta, dtype=float)
    s = np.sin(math.pi * theta)
    near = np.abs(s) < 1e-7
    safe = np.where(near, 1.0, s)
    val = np.exp(1j * math.pi * (N - 1) * theta) * np.sin(math.pi * N * theta) / safe
    if np.any(near):
        m = np.arange(N)
        direct = np.exp(2j * math.pi * np.multiply.outer(theta[near], m)).sum(axis=-1)
        val = np.where(near, 0, val)
        val[near] = direct
    return val if val.ndim else complex(val)


def finite_n_level_density(N: int, x_vec) -> float:
    """``det[(1/N) J_N((x_i - x_j)/N)]`` with no ``1/n!`` (ordered tuples)."""
    x = np.atleast_1d(np.asarray(x_vec, dtype=float))
    if x.size > N:
        raise ValueError("n must not exceed N")
    m = jn_kernel(N, (x[:, None] - x[None, :]) / N) / N
    m = np.atleast_2d(m)
    return float(np.linalg.det(m).real)


def finite_pair_density(N: int, x):
    """Two-level finite-N density as a function of the difference."""
    x = np.asarray(x, dtype=float)
    return 1.0 - np.abs(jn_kernel(N, x / N) / N) ** 2


# ---------------------------------------------------------------------------
# Fredholm spectrum of the sine kernel on an interval
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FredholmSpectrum:
    x: float
    eigenvalues: np.ndarray
    quad_order: int
    full: np.ndarray

    def gap_probability(self) -> float:
        return float(np.prod(1.0 - self.full))


@lru_cache(maxsize=16)
def _gauss_legendre(order):
    return np.polynomial.legendre.leggauss(order)


def _effective_order(x, quad_order):
    # keep roughly 4 nodes per unit length for long intervals
    return max(int(quad_order), int(math.ceil(4.0 * x)) + 16)


def fredholm_spectrum(x: float, count: int = DEFAULT_EIGEN_COUNT,
                      quad_order: int = DEFAULT_QUAD_ORDER) -> FredholmSpectrum:
    """Eigenvalues of the sine kernel on ``[-x/2, x/2]`` by Gauss-Legendre Nystrom."""
    if not x > 0:
        raise ValueError("interval length must be positive")
    if quad_order < 2 * count:
        raise ValueError("quad_order must be at least 2 * count")
    order = _effective_order(x, quad_order)
    nodes, weights = _gauss_legendre(order)
    t = 0.5 * x * nodes
    w = 0.5 * x * weights
    sw = np.sqrt(w)
    k = sw[:, None] * sinc(t[:, None] - t[None, :]) * sw[None, :]
    lam = np.linalg.eigvalsh(k)[::-1]
    if lam[0] > 1.0 + 1e-12 or lam[-1] < -1e-12:
        raise NumericalAccuracyError(
            f"Fredholm eigenvalues leave [0, 1] at x={x} (order {order}); raise quad_order")
    if lam[min(count, lam.size) - 1] > 1e-3 and count < lam.size:
        raise NumericalAccuracyError(f"{count} eigenvalues do not resolve the spectrum at x={x}")
    return FredholmSpectrum(float(x), lam[:count].copy(), order, lam)


def gap_probability(x: float, quad_order: int = DEFAULT_QUAD_ORDER) -> float:
    """``E(x) = prod_j (1 - lambda_j(x))``: no unfolded point in a window of length x."""
    if x == 0:
        return 1.0
    return fredholm_spectrum(x, quad_order=quad_order).gap_probability()


def _selected_product(symmetry, x, quad_order):
    if x == 0:
        return 1.0
    lab = normalize_symmetry(symmetry)
    if lab == "U":
        return gap_probability(x, quad_order)
    lam = fredholm_spectrum(2.0 * x, quad_order=quad_order).full
    if lab == "Sp":
        sel = lam[1::2]
    elif lab in ("O", "O+"):
        sel = lam[0::2]
    else:
        raise ValueError(f"no lowest-zero formula for {symmetry!r}")
    return float(np.prod(1.0 - sel))


def _derivative(f, x, order, h=DIFF_STEP, tol=DIFF_TOL):
    """Derivative of ``f`` at ``x`` (order 1 or 2) with a step-halving check.

    Central stencils when they fit in ``x >= 0``, second-order one-sided
    stencils otherwise; the returned value is Richardson-extrapolated.
    """
    def stencil(step):
        if x - 2 * step >= 0:
            if order == 1:
                return (f(x + step) - f(x - step)) / (2 * step)
            return (f(x + step) - 2 * f(x) + f(x - step)) / step ** 2
        f0, f1, f2 = f(x), f(x + step), f(x + 2 * step)
        if order == 1:
            return (-3 * f0 + 4 * f1 - f2) / (2 * step)
        return (2 * f0 - 5 * f1 + 4 * f2 - f(x + 3 * step)) / step ** 2

    coarse = stencil(h)
    fine = stencil(0.5 * h)
    if abs(coarse - fine) > tol * max(1.0, abs(fine)):
        raise NumericalAccuracyError(
            f"derivative step halving disagrees at x={x}: {coarse!r} vs {fine!r}")
    return (4.0 * fine - coarse) / 3.0


def spacing_density(x: float, quad_order: int = DEFAULT_QUAD_ORDER) -> float:
    """Consecutive-spacing density, the second derivative of the gap probability."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    return _derivative(lambda y: gap_probability(y, quad_order), float(x), 2)


def lowest_zero_density(symmetry, x: float, quad_order: int = DEFAULT_QUAD_ORDER) -> float:
    """Density of the lowest unfolded point above the symmetry point."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    return -_derivative(lambda y: _selected_product(symmetry, y, quad_order), float(x), 1)


def lowest_zero_cdf(symmetry, x, quad_order: int = DEFAULT_QUAD_ORDER):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.array([1.0 - _selected_product(symmetry, float(v), quad_order) for v in x])
    return out


def spacing_curve(grid) -> DensityCurve:
    grid = np.asarray(grid, dtype=float)
    return DensityCurve(grid, np.array([spacing_density(g) for g in grid]), label="spacing")


@lru_cache(maxsize=4)
def _spacing_cdf_table(upper=6.0, step=0.01):
    grid = np.linspace(0.0, upper, int(round(upper / step)) + 1)
    mu = np.array([spacing_density(g) for g in grid])
    cdf = cumulative_simpson(mu, x=grid, initial=0.0)
    return grid, cdf


def spacing_cdf(x):
    """CDF of the spacing density by cumulative quadrature of ``spacing_density``."""
    grid, cdf = _spacing_cdf_table()
    return np.interp(x, grid, cdf, right=1.0)


@lru_cache(maxsize=8)
def _lowest_cdf_table(symmetry, upper=6.0, step=0.01):
    grid = np.linspace(0.0, upper, int(round(upper / step)) + 1)
    return grid, lowest_zero_cdf(symmetry, grid)


def lowest_cdf_interp(symmetry, x):
    grid, cdf = _lowest_cdf_table(normalize_symmetry(symmetry))
    return np.interp(x, grid, cdf, right=1.0)


# ---------------------------------------------------------------------------
# Curves for export
# ---------------------------------------------------------------------------

STATISTICS = ("one-level", "pair-correlation", "spacing", "lowest", "gap")


def predict_curve(statistic: str, symmetry: str, grid) -> DensityCurve:
    grid = np.asarray(grid, dtype=float)
    lab = normalize_symmetry(symmetry)
    if statistic == "one-level":
        smooth, atom = one_level_density(lab, grid)
        atoms = [(0.0, atom)] if atom else []
        return DensityCurve(grid, np.broadcast_to(smooth, grid.shape).copy(), atoms,
                            label=f"one-level {lab}")
    if statistic == "pair-correlation":
        return DensityCurve(grid, pair_correlation_density(grid), label="pair-correlation")
    if statistic == "spacing":
        c = spacing_curve(grid)
        return c
    if statistic == "gap":
        return DensityCurve(grid, np.array([gap_probability(g) for g in grid]), label="gap")
    if statistic == "lowest":
        if lab == "O-":
            raise ValueError("no lowest-zero formula for O-")
        vals = np.array([lowest_zero_density(lab, g) for g in grid])
        return DensityCurve(grid, vals, label=f"lowest {lab}")
    raise ValueError(f"unknown statistic {statistic!r}")
