"""Hot inner loops, each in a numba and a numpy flavour.

The public names (``hamming_scan``, ``first_hit``, ``probe_rerank``,
``radon_splat``) are bound to the numba versions when numba is available and
``DDAHASH_NO_NUMBA`` is unset; see :mod:`ddahash._accel`.  The ``*_numpy``
and ``*_numba`` variants are always exported so tests and benchmarks can
compare them directly.

Packed codes enter these kernels as ``uint64`` word matrices, one row per
code.  Only the XOR/popcount of corresponding words matters, so the byte
order inside a word is irrelevant as long as queries and database agree.
"""

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit

__all__ = [
    "hamming_scan",
    "first_hit",
    "probe_rerank",
    "radon_splat",
    "hamming_scan_numpy",
    "first_hit_numpy",
    "probe_rerank_numpy",
    "radon_splat_numpy",
]

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


# --------------------------------------------------------------------------
# numpy flavour
# --------------------------------------------------------------------------


def hamming_scan_numpy(db_words, q_words):
    """Hamming distance from ``q_words`` to every row of ``db_words``."""
    x = np.bitwise_xor(db_words, q_words)
    return np.bitwise_count(x).sum(axis=1, dtype=np.int64)


def first_hit_numpy(db_words, q_words):
    """(index, distance) of the nearest row; ties go to the lowest index."""
    d = hamming_scan_numpy(db_words, q_words)
    i = int(np.argmin(d))
    return i, int(d[i])


def probe_rerank_numpy(offsets, order, long_words, q_long, keys):
    """Gather the buckets named by ``keys`` and re-rank by long-code distance.

    ``order`` lists database indices grouped by short key, ascending inside
    each group; bucket ``k`` is ``order[offsets[k]:offsets[k + 1]]``.
    Returns ``(best_index, best_distance, n_candidates)`` with
    ``best_index == -1`` when every probed bucket is empty.
    """
    starts = offsets[keys]
    sizes = offsets[keys + 1] - starts
    total = int(sizes.sum())
    if total == 0:
        return -1, -1, 0
    # flat positions into ``order`` for every candidate, without a python loop
    run_start = np.repeat(starts - np.cumsum(sizes) + sizes, sizes)
    cand = order[run_start + np.arange(total)]
    d = hamming_scan_numpy(long_words[cand], q_long)
    best = np.lexsort((cand, d))[0]
    return int(cand[best]), int(d[best]), total


def radon_splat_numpy(image, cosines, sines, n_bins):
    """Project ``image`` along each angle by linear splatting into bins.

    Pixel ``(r, c)`` lands at ``u = (c - m) cos + (r - m) sin + m`` with
    ``m = n // 2`` and is shared between bins ``floor(u)`` and
    ``floor(u) + 1``.  Mass falling past either end of the bin range is
    kept in the edge bin, so each projection sums to the image total.
    """
    n_rows, n_cols = image.shape
    m = n_cols // 2
    cols = np.arange(n_cols, dtype=np.float64) - m
    rows = np.arange(n_rows, dtype=np.float64) - (n_rows // 2)
    values = image.ravel()
    out = np.zeros((len(cosines), n_bins), dtype=np.float64)
    for a, (c, s) in enumerate(zip(cosines, sines)):
        u = (rows[:, None] * s + cols[None, :] * c).ravel() + m
        lo = np.floor(u)
        frac = u - lo
        lo = lo.astype(np.int64)
        hi = np.clip(lo + 1, 0, n_bins - 1)
        lo = np.clip(lo, 0, n_bins - 1)
        out[a] = np.bincount(lo, values * (1.0 - frac), minlength=n_bins)
        out[a] += np.bincount(hi, values * frac, minlength=n_bins)
    return out


# --------------------------------------------------------------------------
# numba flavour
# --------------------------------------------------------------------------


@njit(inline="always", cache=True)
def _popcount64(x):
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return (x * _H01) >> np.uint64(56)


@njit(cache=True, nogil=True)
def hamming_scan_numba(db_words, q_words):
    n, w = db_words.shape
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        d = np.uint64(0)
        for j in range(w):
            d += _popcount64(db_words[i, j] ^ q_words[j])
        out[i] = d
    return out


@njit(cache=True, nogil=True)
def first_hit_numba(db_words, q_words):
    n, w = db_words.shape
    best_i = -1
    best_d = np.int64(1) << 62
    for i in range(n):
        d = np.uint64(0)
        for j in range(w):
            d += _popcount64(db_words[i, j] ^ q_words[j])
        if np.int64(d) < best_d:
            best_d = np.int64(d)
            best_i = i
    return best_i, best_d


@njit(cache=True, nogil=True)
def probe_rerank_numba(offsets, order, long_words, q_long, keys):
    w = long_words.shape[1]
    best_i = -1
    best_d = np.int64(-1)
    total = 0
    for t in range(keys.shape[0]):
        k = keys[t]
        for p in range(offsets[k], offsets[k + 1]):
            i = order[p]
            total += 1
            d = np.uint64(0)
            for j in range(w):
                d += _popcount64(long_words[i, j] ^ q_long[j])
            di = np.int64(d)
            if best_i < 0 or di < best_d or (di == best_d and i < best_i):
                best_d = di
                best_i = i
    return best_i, best_d, total


@njit(cache=True, nogil=True)
def radon_splat_numba(image, cosines, sines, n_bins):
    n_rows, n_cols = image.shape
    m = n_cols // 2
    mr = n_rows // 2
    out = np.zeros((cosines.shape[0], n_bins), dtype=np.float64)
    for a in range(cosines.shape[0]):
        c = cosines[a]
        s = sines[a]
        for r in range(n_rows):
            base = (r - mr) * s + m
            for col in range(n_cols):
                v = image[r, col]
                if v == 0.0:
                    continue
                u = base + (col - m) * c
                lo_f = np.floor(u)
                frac = u - lo_f
                lo = np.int64(lo_f)
                hi = lo + 1
                if lo < 0:
                    lo = 0
                elif lo > n_bins - 1:
                    lo = n_bins - 1
                if hi < 0:
                    hi = 0
                elif hi > n_bins - 1:
                    hi = n_bins - 1
                out[a, lo] += v * (1.0 - frac)
                out[a, hi] += v * frac
    return out


if not HAVE_NUMBA:  # pragma: no cover - numba is normally installed
    hamming_scan_numba = hamming_scan_numpy
    first_hit_numba = first_hit_numpy
    probe_rerank_numba = probe_rerank_numpy
    radon_splat_numba = radon_splat_numpy


def _first_hit_numba(db_words, q_words):
    i, d = first_hit_numba(db_words, q_words)
    return int(i), int(d)


def _probe_rerank_numba(offsets, order, long_words, q_long, keys):
    i, d, n = probe_rerank_numba(offsets, order, long_words, q_long, keys)
    return int(i), int(d), int(n)


if USE_NUMBA:
    hamming_scan = hamming_scan_numba
    first_hit = _first_hit_numba
    probe_rerank = _probe_rerank_numba
    radon_splat = radon_splat_numba
else:
    hamming_scan = hamming_scan_numpy
    first_hit = first_hit_numpy
    probe_rerank = probe_rerank_numpy
    radon_splat = radon_splat_numpy
