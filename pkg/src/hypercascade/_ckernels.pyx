# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: pulse-by-pulse cascade sampling and the brute-force
success enumeration.  Mirrors ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def process_pulses(const double[::1] u, Py_ssize_t pos, Py_ssize_t todo,
                   const double[::1] cdf, long fixed_n, long chain, double ps,
                   long long[::1] depth_hist, long long[::1] pair_hist):
    cdef Py_ssize_t size = u.shape[0]
    cdef Py_ssize_t kmax = cdf.shape[0] - 1
    cdef Py_ssize_t rtop = pair_hist.shape[0] - 1
    cdef Py_ssize_t done = 0, good = 0, start
    cdef long n, i, d, r
    cdef double x
    with nogil:
        while done < todo:
            start = pos
            if fixed_n >= 0:
                n = fixed_n
            else:
                if pos >= size:
                    break
                x = u[pos]
                pos += 1
                n = 0
                while n < kmax and x >= cdf[n]:
                    n += 1
            if size - pos < n * chain:
                pos = start
                break
            r = 0
            for i in range(n):
                d = 0
                while d < chain:
                    x = u[pos]
                    pos += 1
                    if x < ps:
                        d += 1
                    else:
                        break
                depth_hist[d] += 1
                if d == chain:
                    r += 1
            if r < rtop:
                pair_hist[r] += 1
            else:
                pair_hist[rtop] += 1
            if r:
                good += 1
            done += 1
    return done, pos, good


def enumerate_success(probs, long n):
    """Odometer walk over every joint outcome, keeping running prefix
    products and a prefix "some photon reached full depth" flag."""
    cdef double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef long s = p.shape[0]
    if n == 0:
        return 0.0
    cdef Py_ssize_t[::1] idx = np.zeros(n, dtype=np.intp)
    cdef double[::1] pre = np.ones(n + 1, dtype=np.float64)
    cdef unsigned char[::1] full = np.zeros(n + 1, dtype=np.uint8)
    cdef double total = 0.0, c = 0.0, y, t
    cdef Py_ssize_t j, k, last = s - 1
    with nogil:
        for k in range(n):
            pre[k + 1] = pre[k] * p[0]
            full[k + 1] = full[k] or (0 == last)
        while True:
            if full[n]:
                # Kahan summation keeps the oracle accurate over ~1e7 terms
                y = pre[n] - c
                t = total + y
                c = (t - total) - y
                total = t
            j = n - 1
            while j >= 0 and idx[j] == last:
                idx[j] = 0
                j -= 1
            if j < 0:
                break
            idx[j] += 1
            for k in range(j, n):
                pre[k + 1] = pre[k] * p[idx[k]]
                full[k + 1] = full[k] or (idx[k] == last)
    return total
