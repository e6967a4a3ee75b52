"""Empirical statistics of unfolded point sets: matrix eigenangles or zeta zeros.

Matrix samples are unfolded by their mean eigenangle count, so a sample is a
set of points on a circle of circumference ``N`` with unit mean spacing.  Pair
differences are taken modulo ``N``; spacings and lowest points cut the circle
at angle 0 and drop the wrap-around gap.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, stats
from scipy.special import erf

from rmtzeta._hot import cos_sum, pair_counts
from rmtzeta.ensembles import EigenAngles, Group, SymmetryClass
from rmtzeta.kernels import kernel_matrix, n_level_density, normalize_symmetry, one_level_density
from rmtzeta.zeta import ZeroList, count_main_term

TWO_PI = 2.0 * math.pi
DECAY_TOL = 1e-12
ZERO_MODES = ("log", "density")


@dataclass(frozen=True)
class UnfoldedPoints:
    points: np.ndarray
    source: str
    period: float | None = None
    degenerate: bool = False

    def __len__(self):
        return self.points.shape[0]

    @property
    def mean_gap(self) -> float:
        if len(self) < 2:
            return float("nan")
        return float((self.points[-1] - self.points[0]) / (len(self) - 1))

    def centered(self) -> np.ndarray:
        """Points folded into ``[-N/2, N/2)`` for circular samples."""
        if self.period is None:
            return self.points
        p = self.period
        return np.mod(self.points + 0.5 * p, p) - 0.5 * p


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    total: float

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.total * self.widths)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("left,right,count,density\n")
            for lo, hi, c, d in zip(self.edges[:-1].tolist(), self.edges[1:].tolist(),
                                    self.counts.tolist(), self.density.tolist()):
                fh.write(f"{lo!r},{hi!r},{c},{d!r}\n")


def default_edges(upper: float = 5.0, width: float = 0.1) -> np.ndarray:
    return np.linspace(0.0, upper, int(round(upper / width)) + 1)


# ---------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------


def _gauss(x, s):
    return np.exp(-math.pi * (np.asarray(x, dtype=float) / s) ** 2)


def _gauss_hat(xi, s):
    return s * np.exp(-math.pi * (s * np.asarray(xi, dtype=float)) ** 2)


def _fejer(x, d):
    return np.sinc(d * np.asarray(x, dtype=float)) ** 2


def _fejer_hat(xi, d):
    return np.maximum(0.0, 1.0 - np.abs(np.asarray(xi, dtype=float)) / d) / d


def _box(x, h, s):
    x = np.asarray(x, dtype=float)
    c = math.sqrt(math.pi) / s
    return 0.5 * (erf(c * (x + h)) - erf(c * (x - h)))


def _box_hat(xi, h, s):
    xi = np.asarray(xi, dtype=float)
    safe = np.where(xi == 0, 1.0, xi)
    core = np.where(xi == 0, 2 * h, np.sin(TWO_PI * h * safe) / (math.pi * safe))
    return core * np.exp(-math.pi * (s * xi) ** 2)


@dataclass(frozen=True)
class TestFunction:
    """A catalog test function of ``arity`` variables.

    ``product`` kinds are ``prod_i g(x_i)``; ``pair`` kinds are
    ``prod_{i<j} g(x_i - x_j)`` and hence depend on differences only.
    ``g`` is a Gaussian, a Fejer kernel (compactly supported transform) or a
    Gaussian-smoothed box.
    """

    __test__ = False  # not a pytest class

    profile: str
    arity: int
    scale: float = 1.0
    smoothing: float = 0.25
    pair: bool = False

    def __post_init__(self):
        if self.profile not in ("gaussian", "fejer", "box"):
            raise ValueError(f"unknown profile {self.profile!r}")
        if self.arity < 1 or (self.pair and self.arity < 2):
            raise ValueError("bad arity")
        if not (self.scale > 0 and self.smoothing > 0):
            raise ValueError("scale and smoothing must be positive")

    @classmethod
    def gaussian(cls, n: int = 1, scale: float = 1.0) -> "TestFunction":
        return cls("gaussian", n, scale)

    @classmethod
    def fejer(cls, n: int = 1, support: float = 1.0) -> "TestFunction":
        return cls("fejer", n, support)

    @classmethod
    def smoothed_box(cls, n: int = 1, half_width: float = 1.0,
                     smoothing: float = 0.25) -> "TestFunction":
        return cls("box", n, half_width, smoothing)

    @classmethod
    def pair_gaussian(cls, scale: float = 1.0, n: int = 2) -> "TestFunction":
        return cls("gaussian", n, scale, pair=True)

    @classmethod
    def pair_fejer(cls, support: float = 1.0, n: int = 2) -> "TestFunction":
        return cls("fejer", n, support, pair=True)

    @property
    def translation_invariant(self) -> bool:
        return self.pair

    def g(self, x):
        if self.profile == "gaussian":
            return _gauss(x, self.scale)
        if self.profile == "fejer":
            return _fejer(x, self.scale)
        return _box(x, self.scale, self.smoothing)

    def g_hat(self, xi):
        """``int g(x) e^{-2 pi i x xi} dx``."""
        if self.profile == "gaussian":
            return _gauss_hat(xi, self.scale)
        if self.profile == "fejer":
            return _fejer_hat(xi, self.scale)
        return _box_hat(xi, self.scale, self.smoothing)

    @property
    def fourier_support(self) -> float:
        return self.scale if self.profile == "fejer" else math.inf

    def radius(self, tol: float = DECAY_TOL) -> float:
        """Beyond this distance ``|g| <= tol`` (decay certificate)."""
        if self.profile == "gaussian":
            return self.scale * math.sqrt(math.log(1.0 / tol) / math.pi)
        if self.profile == "fejer":
            return 1.0 / (math.pi * self.scale * math.sqrt(tol))
        return self.scale + self.smoothing * math.sqrt(math.log(1.0 / tol) / math.pi)

    def __call__(self, *xs):
        if len(xs) != self.arity:
            raise ValueError(f"expected {self.arity} arguments, got {len(xs)}")
        xs = [np.asarray(x, dtype=float) for x in xs]
        out = np.ones(np.broadcast(*xs).shape)
        if self.pair:
            for i, j in itertools.combinations(range(self.arity), 2):
                out = out * self.g(xs[i] - xs[j])
        else:
            for x in xs:
                out = out * self.g(x)
        return out


# ---------------------------------------------------------------------------
# Unfolding
# ---------------------------------------------------------------------------


def effective_dimension(cls: SymmetryClass) -> int:
    """Mean number of eigenangles per unit turn, away from the symmetry points.

    ``N`` for U(N), ``2N+1`` for USp(2N), ``2N-1`` for SO(2N), ``2N`` for SO(2N+1).
    """
    d = cls.matrix_dim
    return {Group.UNITARY: d, Group.USP: d + 1, Group.SO_EVEN: d - 1,
            Group.SO_ODD: d - 1}.get(cls.group, d)


def unfold_angles(angles: EigenAngles, scaling: str = "effective") -> UnfoldedPoints:
    """Scale angles (fractions of a turn) to unit mean spacing.

    ``effective`` uses :func:`effective_dimension`; ``dimension`` uses the
    matrix size, which leaves an O(1/N) density offset for USp and SO.
    """
    if scaling == "effective":
        n = effective_dimension(angles.cls)
    elif scaling == "dimension":
        n = angles.cls.matrix_dim
    else:
        raise ValueError("scaling must be 'effective' or 'dimension'")
    pts = np.sort(np.asarray(angles.angles, dtype=float) * n)
    degenerate = pts.size > 1 and float(np.ptp(pts)) == 0.0
    return UnfoldedPoints(pts, f"matrix({angles.cls.label})", float(n), degenerate)


def unfold_batch(batch: Sequence[EigenAngles], scaling: str = "effective") -> list[UnfoldedPoints]:
    return [unfold_angles(a, scaling) for a in batch]


def unfold_zeros(zeros: ZeroList, mode: str = "log") -> UnfoldedPoints:
    """``log``: ``g log g / 2pi``.  ``density``: ``(g/2pi) log(g/(2 pi e))``.

    The density mode is the main term of the zero count, whose derivative is
    the local density; it is monotone for ``g > 2 pi``.
    """
    g = np.asarray(zeros.ordinates, dtype=float)
    if mode == "log":
        if np.any(g <= 1.0):
            raise ValueError("log-mode unfolding needs ordinates > 1")
        pts = g * np.log(g) / TWO_PI
    elif mode == "density":
        if np.any(g <= TWO_PI):
            raise ValueError("density-mode unfolding needs ordinates > 2 pi")
        pts = g / TWO_PI * np.log(g / (TWO_PI * math.e))
    else:
        raise ValueError(f"mode must be one of {ZERO_MODES}")
    lo, hi = zeros.height_range
    return UnfoldedPoints(pts, f"zeros({lo:g},{hi:g};{mode})", None, False)


def _check_samples(samples):
    if len(samples) == 0:
        raise ValueError("empty sample set")
    return sorted(samples, key=lambda s: s.points.tolist())


def _csr(samples):
    offsets = np.zeros(len(samples) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(s) for s in samples])
    values = np.concatenate([s.points for s in samples]) if offsets[-1] else np.zeros(0)
    return values.astype(float), offsets


def _period_of(samples):
    periods = {s.period for s in samples}
    if len(periods) != 1:
        raise ValueError("samples mix circular and linear sources")
    p = periods.pop()
    return 0.0 if p is None else float(p)


# ---------------------------------------------------------------------------
# Pair correlation
# ---------------------------------------------------------------------------


def pair_correlation_histogram(samples: Sequence[UnfoldedPoints], edges) -> Histogram:
    """Ordered-pair differences per point, binned."""
    samples = _check_samples(samples)
    edges = np.asarray(edges, dtype=float)
    values, offsets = _csr(samples)
    counts = pair_counts(values, offsets, _period_of(samples), edges)
    return Histogram(edges, counts.astype(float), float(offsets[-1]))


def empirical_pair_correlation(samples: Sequence[UnfoldedPoints], alpha: float,
                               beta: float) -> float:
    """``#{ordered pairs i != j : alpha <= t_j - t_i < beta} / #points``."""
    if not 0 < alpha < beta:
        raise ValueError("need 0 < alpha < beta")
    h = pair_correlation_histogram(samples, np.array([alpha, beta]))
    return float(h.counts[0] / h.total)


# ---------------------------------------------------------------------------
# n-level and n-correlation sums
# ---------------------------------------------------------------------------


def _tuple_sum(points, f: TestFunction):
    n = f.arity
    if n == 1:
        return float(np.sum(f(points)))
    if n == 2:
        x, y = np.meshgrid(points, points, indexing="ij")
        vals = f(x, y)
        np.fill_diagonal(vals, 0.0)
        return float(vals.sum())
    near = points[np.abs(points) <= f.radius()] if not f.pair else points
    if near.size < n:
        return 0.0
    idx = np.array(list(itertools.permutations(range(near.size), n)))
    return float(np.sum(f(*[near[idx[:, k]] for k in range(n)])))


def empirical_n_level(samples: Sequence[UnfoldedPoints], f: TestFunction) -> float:
    """Average over samples of ``sum f(t_{j_1}, ..., t_{j_n})`` over distinct indices."""
    samples = _check_samples(samples)
    if f.arity > min(len(s) for s in samples):
        raise ValueError("arity exceeds the sample length")
    return math.fsum(_tuple_sum(s.centered(), f) for s in samples) / len(samples)


def _circular(d, period):
    if period:
        return np.mod(d + 0.5 * period, period) - 0.5 * period
    return d


def _correlation_sum(points, period, f: TestFunction):
    n = f.arity
    if n == 2:
        d = _circular(points[None, :] - points[:, None], period)
        vals = f.g(d)
        np.fill_diagonal(vals, 0.0)
        return float(vals.sum())
    r = f.radius()
    total = 0.0
    for i in range(points.size):
        d = _circular(np.delete(points, i) - points[i], period)
        d = d[np.abs(d) <= r]
        if d.size < n - 1:
            continue
        idx = np.array(list(itertools.permutations(range(d.size), n - 1)))
        args = [np.zeros(idx.shape[0])] + [d[idx[:, k]] for k in range(n - 1)]
        total += float(np.sum(f(*args)))
    return total


def empirical_n_correlation(samples: Sequence[UnfoldedPoints], f: TestFunction) -> float:
    """``sum over distinct tuples of f / #points``, for difference-only ``f``."""
    if not f.translation_invariant:
        raise ValueError("n-correlation needs a translation-invariant test function")
    samples = _check_samples(samples)
    period = _period_of(samples)
    total = math.fsum(_correlation_sum(s.points, period, f) for s in samples)
    return total / sum(len(s) for s in samples)


def analytic_n_level(symmetry: str, f: TestFunction) -> float:
    """``int f W`` for the scaling-limit n-level density, n = 1 or 2."""
    lab = normalize_symmetry(symmetry)
    r = f.radius()
    if f.arity == 1:
        smooth = integrate.quad(lambda x: float(f(x)) * float(one_level_density(lab, x)[0]),
                                -r, r, limit=400, points=[0.0])[0]
        return smooth + one_level_density(lab, 0.0)[1] * float(f(0.0))
    if f.arity == 2:
        if lab in ("O", "O-"):
            raise ValueError("two-level atoms are not tabulated for O and O-")

        def integrand(y, x):
            return float(f(x, y)) * n_level_density(lab, [x, y])[0]
        return integrate.dblquad(integrand, -r, r, -r, r, epsabs=1e-10, epsrel=1e-8)[0]
    raise ValueError("analytic n-level supports n <= 2")


def analytic_n_correlation(f: TestFunction) -> float:
    """``int f(0, x_2, .., x_n) det[K(x_i - x_j)] dx_2 .. dx_n``."""
    if not f.translation_invariant:
        raise ValueError("n-correlation needs a translation-invariant test function")
    if f.arity == 2:
        # sinc^2 has the triangle max(0, 1 - |xi|) as its transform
        tri = integrate.quad(lambda xi: float(f.g_hat(xi)) * (1.0 - xi), 0.0, 1.0,
                             points=[min(f.fourier_support, 1.0)], epsabs=1e-13)[0]
        return float(f.g_hat(0.0)) - 2.0 * tri
    r = f.radius(1e-10)
    if f.arity == 3:
        def integrand(y, x):
            return float(f(0.0, x, y)) * float(np.linalg.det(kernel_matrix(0, [0.0, x, y])))
        return integrate.dblquad(integrand, -r, r, -r, r, epsabs=1e-10, epsrel=1e-8)[0]
    raise ValueError("analytic n-correlation supports n = 2, 3")


# ---------------------------------------------------------------------------
# Spacings and lowest points
# ---------------------------------------------------------------------------


def pooled_spacings(samples: Sequence[UnfoldedPoints]) -> np.ndarray:
    samples = _check_samples(samples)
    if min(len(s) for s in samples) < 2:
        raise ValueError("spacings need at least two points per sample")
    return np.concatenate([np.diff(s.points) for s in samples])


def empirical_spacings(samples: Sequence[UnfoldedPoints], edges=None) -> Histogram:
    gaps = pooled_spacings(samples)
    edges = default_edges() if edges is None else np.asarray(edges, dtype=float)
    counts = np.histogram(gaps, bins=edges)[0].astype(float)
    return Histogram(edges, counts, float(gaps.size))


def jth_lowest_values(samples: Sequence[UnfoldedPoints], j: int = 1) -> np.ndarray:
    samples = _check_samples(samples)
    if j < 1:
        raise ValueError("j must be positive")
    out = []
    for s in samples:
        pts = s.points[s.points >= 0]
        if j > pts.size:
            raise ValueError(f"j={j} exceeds the {pts.size} nonnegative points of a sample")
        out.append(np.partition(pts, j - 1)[j - 1])
    return np.array(out)


def jth_lowest(samples: Sequence[UnfoldedPoints], j: int = 1, edges=None) -> Histogram:
    vals = jth_lowest_values(samples, j)
    edges = default_edges() if edges is None else np.asarray(edges, dtype=float)
    counts = np.histogram(vals, bins=edges)[0].astype(float)
    return Histogram(edges, counts, float(vals.size))


def ks_distance(sample, cdf: Callable) -> float:
    return float(stats.kstest(np.asarray(sample, dtype=float), cdf).statistic)


def ks_two_sample(a, b) -> float:
    return float(stats.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float)).statistic)


# ---------------------------------------------------------------------------
# Montgomery's F
# ---------------------------------------------------------------------------


def montgomery_weight(u):
    u = np.asarray(u, dtype=float)
    return 4.0 / (4.0 + u * u)


def _zeros_up_to(zeros: ZeroList, T: float) -> np.ndarray:
    g = np.asarray(zeros.ordinates, dtype=float)
    g = g[g <= T]
    if zeros.flags:
        raise ValueError("zero list carries completeness flags: " + "; ".join(zeros.flags))
    if T > TWO_PI * math.e and abs(g.size - count_main_term(T)) > 3 + math.log(T):
        raise ValueError(f"zero list looks incomplete: {g.size} zeros vs "
                         f"main term {count_main_term(T):.1f}")
    if g.size < 50:
        raise ValueError("need at least 50 zeros up to T")
    return g


def _pair_differences(g):
    i, j = np.triu_indices(g.size, k=1)
    return g[j] - g[i]


def montgomery_F(zeros: ZeroList, T: float, alpha: float) -> float:
    """``(1/N) sum_{g, g' <= T} T^{i alpha (g - g')} w(g - g')``, real part.

    The imaginary part is accumulated too and must cancel to 1e-10.
    """
    g = _zeros_up_to(zeros, T)
    lt = math.log(T)
    re = 0.0
    im = 0.0
    for lo in range(0, g.size, 512):
        d = g[lo:lo + 512, None] - g[None, :]
        terms = np.exp(1j * alpha * lt * d) * montgomery_weight(d)
        re += float(terms.real.sum())
        im += float(terms.imag.sum())
    if abs(im) > 1e-10 * max(1.0, abs(re)):
        raise ArithmeticError(f"imaginary residual {im:.3g} in F")
    return re / g.size


def montgomery_F_grid(zeros: ZeroList, T: float, alphas) -> np.ndarray:
    """``F`` on many ``alpha`` via the cosine kernel over unordered pairs."""
    g = _zeros_up_to(zeros, T)
    d = _pair_differences(g)
    w = montgomery_weight(d)
    freqs = math.log(T) * np.asarray(alphas, dtype=float)
    return (g.size + 2.0 * cos_sum(d, w, freqs)) / g.size


def weighted_pair_sum(zeros: ZeroList, T: float, r: TestFunction) -> float:
    """``(1/N) sum r((g - g') log T / 2pi) w(g - g')`` including the diagonal."""
    if r.arity != 1:
        raise ValueError("r must have arity 1")
    g = _zeros_up_to(zeros, T)
    d = _pair_differences(g)
    scale = math.log(T) / TWO_PI
    off = math.fsum((r.g(d * scale) * montgomery_weight(d)).tolist())
    return (g.size * float(r.g(0.0)) + 2.0 * off) / g.size


def weighted_pair_sum_fourier(zeros: ZeroList, T: float, r: TestFunction,
                              panel: float = 0.005, cutoff: float = 2.0) -> tuple[float, float]:
    """``int r_hat(alpha) F(alpha) d alpha`` by Gauss-Legendre panels, and a tail bound.

    ``F`` is even, so the integral is twice the one over ``[0, a]`` where
    ``a`` is the transform's support or ``cutoff``.
    """
    a = min(r.fourier_support, cutoff)
    n = int(math.ceil(a / panel))
    x, w = np.polynomial.legendre.leggauss(8)
    edges = np.linspace(0.0, a, n + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    F = montgomery_F_grid(zeros, T, nodes)
    value = 2.0 * math.fsum((weights * r.g_hat(nodes) * F).tolist())
    if a >= r.fourier_support:
        tail = 0.0
    else:
        # |F| <= F(0); bound the transform mass beyond the cutoff
        f0 = float(montgomery_F_grid(zeros, T, [0.0])[0])
        tail = 2.0 * f0 * integrate.quad(lambda s: abs(float(r.g_hat(s))), a, np.inf)[0]
    return value, tail
