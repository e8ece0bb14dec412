# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_fallback.py`` for the reference semantics."""

import numpy as np

from libc.math cimport log, sqrt, fabs
from libc.stdint cimport uint64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double horner(const double* c, double r) noexcept nogil:
    cdef double acc = c[7] * r + c[6]
    cdef int i
    for i in range(5, -1, -1):
        acc = acc * r + c[i]
    return acc


cdef double A[8]
cdef double B[8]
cdef double C[8]
cdef double D[8]
cdef double E[8]
cdef double F[8]
A[:] = [3.387132872796366608, 133.14166789178437745, 1971.5909503065514427,
        13731.693765509461125, 45921.953931549871457, 67265.770927008700853,
        33430.575583588128105, 2509.0809287301226727]
B[:] = [1.0, 42.313330701600911252, 687.1870074920579083, 5394.1960214247511077,
        21213.794301586595867, 39307.89580009271061, 28729.085735721942674,
        5226.495278852545925]
C[:] = [1.42343711074968357734, 4.6303378461565452959, 5.7694972214606914055,
        3.64784832476320460504, 1.27045825245236838258, 0.24178072517745061177,
        0.0227238449892691845833, 7.7454501427834140764e-4]
D[:] = [1.0, 2.05319162663775882187, 1.6763848301838038494, 0.68976733498510000455,
        0.14810397642748007459, 0.0151986665636164571966, 5.475938084995344946e-4,
        1.05075007164441684324e-9]
E[:] = [6.6579046435011037772, 5.4637849111641143699, 1.7848265399172913358,
        0.29656057182850489123, 0.026532189526576123093, 0.0012426609473880784386,
        2.71155556874348757815e-5, 2.01033439929228813265e-7]
F[:] = [1.0, 0.59983220655588793769, 0.13692988092273580531, 0.0148753612908506148525,
        7.868691311456132591e-4, 1.8463183175100546818e-5, 1.4215117583164458887e-7,
        2.04426310338993978564e-15]


cdef inline double ppnd16(double p) noexcept nogil:
    cdef double q = p - 0.5
    cdef double r, val
    if fabs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * horner(A, r) / horner(B, r)
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = sqrt(-log(r))
    if r <= 5.0:
        r = r - 1.6
        val = horner(C, r) / horner(D, r)
    else:
        r = r - 5.0
        val = horner(E, r) / horner(F, r)
    if q < 0.0:
        return -val
    return val


def normal_ppf(p):
    cdef const double[::1] src = np.ascontiguousarray(p, dtype=np.float64).ravel()
    out = np.empty(src.shape[0])
    cdef double[::1] dst = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(src.shape[0]):
            dst[i] = ppnd16(src[i])
    return out.reshape(np.shape(p))


def normal_block(unsigned long long seed, unsigned long long row_start,
                 Py_ssize_t n_rows, scales):
    cdef const double[::1] sc = np.ascontiguousarray(scales, dtype=np.float64)
    cdef Py_ssize_t k = sc.shape[0]
    out = np.zeros((n_rows, k))
    if n_rows == 0 or k == 0:
        return out
    cdef double[:, ::1] dst = out
    cdef uint64_t h0 = mix64(<uint64_t>seed + GOLDEN)
    cdef uint64_t h1, h
    cdef double u
    cdef Py_ssize_t j, i
    with nogil:
        for j in range(n_rows):
            h1 = mix64((h0 ^ (<uint64_t>row_start + <uint64_t>j)) + GOLDEN)
            for i in range(k):
                h = mix64((h1 ^ <uint64_t>i) + GOLDEN)
                u = (<double>(h >> 12) + 0.5) * 2.220446049250313e-16
                dst[j, i] = ppnd16(u) * sc[i]
    return out


def sq_diff_sum(a, b=None):
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    cdef const double[:, ::1] x = arr
    cdef const double[:, ::1] y
    cdef bint has_b = b is not None
    if has_b:
        y = np.ascontiguousarray(b, dtype=np.float64).reshape(arr.shape)
    cdef Py_ssize_t r, c, n = x.shape[0], m = x.shape[1]
    cdef double s0, s1, s2, s3, d0, d1, d2, d3, total = 0.0
    with nogil:
        for r in range(n):
            s0 = s1 = s2 = s3 = 0.0
            c = 0
            if has_b:
                while c + 4 <= m:
                    d0 = x[r, c] - y[r, c]
                    d1 = x[r, c + 1] - y[r, c + 1]
                    d2 = x[r, c + 2] - y[r, c + 2]
                    d3 = x[r, c + 3] - y[r, c + 3]
                    s0 += d0 * d0
                    s1 += d1 * d1
                    s2 += d2 * d2
                    s3 += d3 * d3
                    c += 4
                while c < m:
                    d0 = x[r, c] - y[r, c]
                    s0 += d0 * d0
                    c += 1
            else:
                while c + 4 <= m:
                    s0 += x[r, c] * x[r, c]
                    s1 += x[r, c + 1] * x[r, c + 1]
                    s2 += x[r, c + 2] * x[r, c + 2]
                    s3 += x[r, c + 3] * x[r, c + 3]
                    c += 4
                while c < m:
                    s0 += x[r, c] * x[r, c]
                    c += 1
            total += (s0 + s1) + (s2 + s3)
    return total
