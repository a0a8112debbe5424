# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend; see _pure.py for the shared semantics."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double _EPS = 1e-12


cdef inline double _var_point(const double* a, const double* b, const double* t,
                              const double* k, const double* h) noexcept nogil:
    cdef double ak = a[0] * k[0] + a[1] * k[1] + a[2] * k[2]
    cdef double tk0 = t[0] * k[0] + t[3] * k[1] + t[6] * k[2]
    cdef double tk1 = t[1] * k[0] + t[4] * k[1] + t[7] * k[2]
    cdef double tk2 = t[2] * k[0] + t[5] * k[1] + t[8] * k[2]
    cdef double total = 0.0
    cdef double sign = 1.0
    cdef double p, m0, m1, m2, hm, term
    cdef int s
    for s in range(2):
        p = 0.5 * (1.0 + sign * ak)
        if p > _EPS:
            m0 = 0.5 * (b[0] + sign * tk0)
            m1 = 0.5 * (b[1] + sign * tk1)
            m2 = 0.5 * (b[2] + sign * tk2)
            hm = h[0] * m0 + h[1] * m1 + h[2] * m2
            term = p - hm * hm / p
            if term > 0.0:
                total += term
        sign = -sign
    return total


cdef inline double _qfi_point(const double* a, const double* b, const double* t,
                              const double* k, const double* g) noexcept nogil:
    cdef double ak = a[0] * k[0] + a[1] * k[1] + a[2] * k[2]
    cdef double tk0 = t[0] * k[0] + t[3] * k[1] + t[6] * k[2]
    cdef double tk1 = t[1] * k[0] + t[4] * k[1] + t[7] * k[2]
    cdef double tk2 = t[2] * k[0] + t[5] * k[1] + t[8] * k[2]
    cdef double total = 0.0
    cdef double sign = 1.0
    cdef double p, m0, m1, m2, cx, cy, cz
    cdef int s
    for s in range(2):
        p = 0.5 * (1.0 + sign * ak)
        if p > _EPS:
            m0 = 0.5 * (b[0] + sign * tk0)
            m1 = 0.5 * (b[1] + sign * tk1)
            m2 = 0.5 * (b[2] + sign * tk2)
            cx = g[1] * m2 - g[2] * m1
            cy = g[2] * m0 - g[0] * m2
            cz = g[0] * m1 - g[1] * m0
            total += 4.0 * (cx * cx + cy * cy + cz * cz) / p
        sign = -sign
    return total


def cond_var_grid(const double[::1] a, const double[::1] b, const double[:, ::1] t,
                  const double[:, ::1] ks, const double[::1] h):
    cdef Py_ssize_t n = ks.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _var_point(&a[0], &b[0], &t[0, 0], &ks[i, 0], &h[0])
    return out


def cond_qfi_grid(const double[::1] a, const double[::1] b, const double[:, ::1] t,
                  const double[:, ::1] ks, const double[::1] g):
    cdef Py_ssize_t n = ks.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _qfi_point(&a[0], &b[0], &t[0, 0], &ks[i, 0], &g[0])
    return out


def cond_var_point(const double[::1] a, const double[::1] b, const double[:, ::1] t,
                   const double[::1] k, const double[::1] h):
    return _var_point(&a[0], &b[0], &t[0, 0], &k[0], &h[0])


def cond_qfi_point(const double[::1] a, const double[::1] b, const double[:, ::1] t,
                   const double[::1] k, const double[::1] g):
    return _qfi_point(&a[0], &b[0], &t[0, 0], &k[0], &g[0])
