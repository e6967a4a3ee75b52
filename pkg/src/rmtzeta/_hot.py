"""Inner loops that dominate runtime, each in a numba and a numpy flavour.

The public names at the bottom are bound to one flavour according to
:mod:`rmtzeta._accel`; both flavours stay importable for benchmarks and
equivalence tests.  Ragged sample collections are passed in CSR form
(``values`` concatenated, ``offsets`` of length ``count + 1``).
"""
import math

import numpy as np

from rmtzeta._accel import njit, pick

TWO_PI = 2.0 * math.pi

# ---------------------------------------------------------------------------
# Riemann-Siegel main sum:  sum_{n <= m(t)} n^{-1/2} cos(theta - t log n)
# ---------------------------------------------------------------------------


@njit
def _rs_main_sum_numba(t, theta):
    out = np.empty(t.shape[0])
    for k in range(t.shape[0]):
        m = int(math.floor(math.sqrt(t[k] / TWO_PI)))
        acc = 0.0
        for n in range(1, m + 1):
            acc += math.cos(theta[k] - t[k] * math.log(n)) / math.sqrt(n)
        out[k] = acc
    return out


def _rs_main_sum_numpy(t, theta, chunk=4096):
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    out = np.empty(t.shape[0])
    for lo in range(0, t.shape[0], chunk):
        tt = t[lo:lo + chunk]
        th = theta[lo:lo + chunk]
        m = np.floor(np.sqrt(tt / TWO_PI)).astype(np.int64)
        n = np.arange(1, max(int(m.max(initial=0)), 1) + 1)
        logn = np.log(n)
        terms = np.cos(th[:, None] - tt[:, None] * logn[None, :]) / np.sqrt(n)[None, :]
        terms[n[None, :] > m[:, None]] = 0.0
        out[lo:lo + chunk] = terms.sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# Dirichlet head of the Euler-Maclaurin sum:  sum_{n < N_k} n^{-s_k}
# ---------------------------------------------------------------------------


@njit
def _em_head_numba(sigma, t, nterms):
    re = np.zeros(sigma.shape[0])
    im = np.zeros(sigma.shape[0])
    for k in range(sigma.shape[0]):
        ar = 0.0
        ai = 0.0
        for n in range(1, nterms[k]):
            ln = math.log(n)
            mag = math.exp(-sigma[k] * ln)
            ph = t[k] * ln
            ar += mag * math.cos(ph)
            ai -= mag * math.sin(ph)
        re[k] = ar
        im[k] = ai
    return re, im


def _em_head_numpy(sigma, t, nterms, chunk=256):
    sigma = np.asarray(sigma, dtype=float)
    t = np.asarray(t, dtype=float)
    nterms = np.asarray(nterms, dtype=np.int64)
    re = np.zeros(sigma.shape[0])
    im = np.zeros(sigma.shape[0])
    order = np.argsort(nterms)
    for lo in range(0, order.shape[0], chunk):
        idx = order[lo:lo + chunk]
        top = int(nterms[idx].max(initial=1))
        n = np.arange(1, max(top, 2))
        ln = np.log(n)
        mag = np.exp(-sigma[idx, None] * ln[None, :])
        ph = t[idx, None] * ln[None, :]
        live = n[None, :] < nterms[idx, None]
        re[idx] = np.where(live, mag * np.cos(ph), 0.0).sum(axis=1)
        im[idx] = -np.where(live, mag * np.sin(ph), 0.0).sum(axis=1)
    return re, im


# ---------------------------------------------------------------------------
# Ordered-pair difference histogram over a ragged batch of point sets
# ---------------------------------------------------------------------------


@njit
def _pair_counts_numba(values, offsets, period, edges):
    nb = edges.shape[0] - 1
    counts = np.zeros(nb, dtype=np.int64)
    lo_edge = edges[0]
    hi_edge = edges[nb]
    for s in range(offsets.shape[0] - 1):
        a = offsets[s]
        b = offsets[s + 1]
        for i in range(a, b):
            for j in range(a, b):
                if i == j:
                    continue
                d = values[j] - values[i]
                if period > 0.0:
                    d = d - period * math.floor(d / period)
                if d < lo_edge or d >= hi_edge:
                    continue
                # binary search for the bin
                lo = 0
                hi = nb
                while hi - lo > 1:
                    mid = (lo + hi) // 2
                    if d >= edges[mid]:
                        lo = mid
                    else:
                        hi = mid
                counts[lo] += 1
    return counts


def _pair_counts_numpy(values, offsets, period, edges):
    values = np.asarray(values, dtype=float)
    counts = np.zeros(len(edges) - 1, dtype=np.int64)
    for s in range(len(offsets) - 1):
        pts = values[offsets[s]:offsets[s + 1]]
        d = pts[None, :] - pts[:, None]
        if period > 0.0:
            d = d - period * np.floor(d / period)
        off = ~np.eye(pts.shape[0], dtype=bool)
        d = d[off]
        d = d[(d >= edges[0]) & (d < edges[-1])]
        counts += np.histogram(d, bins=edges)[0]
    return counts


# ---------------------------------------------------------------------------
# Weighted cosine sums:  out[k] = sum_d w_d cos(freq_k * d)
# ---------------------------------------------------------------------------


@njit
def _cos_sum_numba(diffs, weights, freqs):
    out = np.zeros(freqs.shape[0])
    for k in range(freqs.shape[0]):
        acc = 0.0
        f = freqs[k]
        for d in range(diffs.shape[0]):
            acc += weights[d] * math.cos(f * diffs[d])
        out[k] = acc
    return out


def _cos_sum_numpy(diffs, weights, freqs, chunk=256):
    diffs = np.asarray(diffs, dtype=float)
    weights = np.asarray(weights, dtype=float)
    freqs = np.asarray(freqs, dtype=float)
    out = np.empty(freqs.shape[0])
    step = max(1, int(chunk * 20000 / max(diffs.shape[0], 1)))
    for lo in range(0, freqs.shape[0], step):
        f = freqs[lo:lo + step]
        out[lo:lo + step] = np.cos(np.outer(f, diffs)) @ weights
    return out


rs_main_sum = pick(_rs_main_sum_numba, _rs_main_sum_numpy)
em_head = pick(_em_head_numba, _em_head_numpy)
pair_counts = pick(_pair_counts_numba, _pair_counts_numpy)
cos_sum = pick(_cos_sum_numba, _cos_sum_numpy)

NUMBA_KERNELS = {
    "rs_main_sum": _rs_main_sum_numba,
    "em_head": _em_head_numba,
    "pair_counts": _pair_counts_numba,
    "cos_sum": _cos_sum_numba,
}
NUMPY_KERNELS = {
    "rs_main_sum": _rs_main_sum_numpy,
    "em_head": _em_head_numpy,
    "pair_counts": _pair_counts_numpy,
    "cos_sum": _cos_sum_numpy,
}
