# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops over bit-packed shot words.

Every function here has a drop-in twin in :mod:`demest._kernels_py`; the two are
kept behaviourally identical and are compared in ``benchmarks/bench_kernels.py``.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


def xor_bits(uint64_t[::1] row, const int64_t[::1] positions):
    """Toggle bit ``p`` of the packed ``row`` for every ``p`` in ``positions``."""
    cdef Py_ssize_t i, n = positions.shape[0]
    cdef int64_t p
    with nogil:
        for i in range(n):
            p = positions[i]
            row[p >> 6] ^= (<uint64_t>1) << (p & 63)


def coincidence_counts(const uint64_t[:, ::1] words, const int64_t[:, ::1] sets):
    """Popcount of the AND of the rows listed in each row of ``sets`` (-1 pads)."""
    cdef Py_ssize_t n_sets = sets.shape[0], width = sets.shape[1]
    cdef Py_ssize_t n_words = words.shape[1]
    cdef Py_ssize_t s, j, w, m
    cdef uint64_t acc
    cdef int64_t total
    cdef int64_t idx[16]
    out = np.zeros(n_sets, dtype=np.int64)
    cdef int64_t[::1] out_v = out
    if width > 16:
        raise ValueError("at most 16 detectors per coincidence set")
    with nogil:
        for s in range(n_sets):
            m = 0
            for j in range(width):
                if sets[s, j] >= 0:
                    idx[m] = sets[s, j]
                    m += 1
            total = 0
            for w in range(n_words):
                acc = words[idx[0], w]
                for j in range(1, m):
                    acc = acc & words[idx[j], w]
                total += __builtin_popcountll(acc)
            out_v[s] = total
    return out


def pattern_counts(const uint64_t[:, ::1] words, const int64_t[::1] idx, int64_t n_shots):
    """Histogram of the exact on/off patterns of the rows ``idx`` over all shots.

    Pattern ``x`` has bit ``j`` set when row ``idx[j]`` fires.
    """
    cdef Py_ssize_t m = idx.shape[0], n_words = words.shape[1]
    cdef Py_ssize_t n_pat = (<Py_ssize_t>1) << m
    cdef Py_ssize_t w, j, x
    cdef uint64_t acc
    cdef uint64_t row[16]
    if m > 16:
        raise ValueError("at most 16 detectors per pattern histogram")
    out = np.zeros(n_pat, dtype=np.int64)
    cdef int64_t[::1] out_v = out
    with nogil:
        for w in range(n_words):
            for j in range(m):
                row[j] = words[idx[j], w]
            for x in range(n_pat):
                acc = ~(<uint64_t>0)
                for j in range(m):
                    if (x >> j) & 1:
                        acc = acc & row[j]
                    else:
                        acc = acc & ~row[j]
                out_v[x] += __builtin_popcountll(acc)
    # padding bits past the last shot read as all-off
    out[0] -= n_words * 64 - n_shots
    return out


def match_dp(const double[:, ::1] dist, const double[::1] bdist):
    """Exact minimum-weight matching of ``k`` defects with an absorbing boundary.

    Returns ``(partner, total)`` where ``partner[i]`` is the defect matched to
    ``i`` or -1 when ``i`` is matched to the boundary. Ties keep the first
    candidate in the order (boundary, then partners by ascending index).
    """
    cdef Py_ssize_t k = bdist.shape[0]
    if k > 24:
        raise ValueError("subset DP limited to 24 defects")
    cdef Py_ssize_t n_masks = (<Py_ssize_t>1) << k
    cdef double *f = <double *> malloc(n_masks * sizeof(double))
    cdef int *choice = <int *> malloc(n_masks * sizeof(int))
    if f == NULL or choice == NULL:
        free(f)
        free(choice)
        raise MemoryError()
    cdef Py_ssize_t mask, rest, mj
    cdef int i, j, ch
    cdef double best, c
    partner = np.full(k, -1, dtype=np.int64)
    cdef int64_t[::1] partner_v = partner
    cdef double total
    with nogil:
        f[0] = 0.0
        choice[0] = -2
        for mask in range(1, n_masks):
            i = __builtin_ctzll(<unsigned long long>mask)
            rest = mask ^ ((<Py_ssize_t>1) << i)
            best = bdist[i] + f[rest]
            ch = -1
            mj = rest
            while mj:
                j = __builtin_ctzll(<unsigned long long>mj)
                mj = mj & (mj - 1)
                c = dist[i, j] + f[rest ^ ((<Py_ssize_t>1) << j)]
                if c < best:
                    best = c
                    ch = j
            f[mask] = best
            choice[mask] = ch
        total = f[n_masks - 1]
        mask = n_masks - 1
        while mask:
            i = __builtin_ctzll(<unsigned long long>mask)
            ch = choice[mask]
            mask = mask ^ ((<Py_ssize_t>1) << i)
            if ch >= 0:
                partner_v[i] = ch
                partner_v[ch] = i
                mask = mask ^ ((<Py_ssize_t>1) << ch)
    free(f)
    free(choice)
    return partner, total
