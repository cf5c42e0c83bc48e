# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Numerov lattice propagators (see _fallback.py for the contract)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport acosh, exp, fabs, sqrt

cnp.import_array()

DEF RENORM = 1e200


def propagate_complex(v, double h, k2, u0, u1):
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef double[::1] kk = np.ascontiguousarray(k2, dtype=np.float64)
    cdef Py_ssize_t nx = vv.shape[0], nk = kk.shape[0]
    out = np.empty((nx, nk), dtype=np.complex128)
    cdef double complex[:, ::1] u = out
    cdef double complex[::1] u0v = np.ascontiguousarray(u0, dtype=np.complex128)
    cdef double complex[::1] u1v = np.ascontiguousarray(u1, dtype=np.complex128)
    cdef double c1 = h * h / 12.0, c2 = 5.0 * h * h / 6.0
    cdef Py_ssize_t j, c
    cdef double q_prev, q_curr, q_next
    for c in range(nk):
        u[0, c] = u0v[c]
        u[1, c] = u1v[c]
    for j in range(1, nx - 1):
        q_prev = vv[j - 1]
        q_curr = vv[j]
        q_next = vv[j + 1]
        for c in range(nk):
            u[j + 1, c] = ((2.0 + c2 * (q_curr - kk[c])) * u[j, c]
                           - (1.0 - c1 * (q_prev - kk[c])) * u[j - 1, c]) \
                          / (1.0 - c1 * (q_next - kk[c]))
    return out


def propagate_real(v, double h, kappa, bint from_left=True):
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef double[::1] ka = np.ascontiguousarray(kappa, dtype=np.float64)
    cdef Py_ssize_t nx = vv.shape[0], nk = ka.shape[0]
    out = np.empty((nx, nk), dtype=np.float64)
    cdef double[:, ::1] u = out
    cdef double c1 = h * h / 12.0, c2 = 5.0 * h * h / 6.0
    cdef Py_ssize_t j, c, i, step
    cdef Py_ssize_t start, stop
    cdef double k2, th, t, val, scale
    for c in range(nk):
        t = (ka[c] * h) * (ka[c] * h)
        th = acosh((1.0 + 5.0 * t / 12.0) / (1.0 - t / 12.0))
        if from_left:
            u[0, c] = 1.0
            u[1, c] = exp(th)
        else:
            u[nx - 1, c] = 1.0
            u[nx - 2, c] = exp(th)
    if from_left:
        start = 1; stop = nx - 1; step = 1
    else:
        start = nx - 2; stop = 0; step = -1
    for j in range(start, stop, step):
        for c in range(nk):
            k2 = ka[c] * ka[c]
            val = ((2.0 + c2 * (vv[j] + k2)) * u[j, c]
                   - (1.0 - c1 * (vv[j - step] + k2)) * u[j - step, c]) \
                  / (1.0 - c1 * (vv[j + step] + k2))
            u[j + step, c] = val
            if fabs(val) > RENORM:
                scale = fabs(val)
                if from_left:
                    for i in range(j + 2):
                        u[i, c] /= scale
                else:
                    for i in range(j + step, nx):
                        u[i, c] /= scale
    return out


def shoot_wronskian(v, double h, kappa):
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef double[::1] ka = np.ascontiguousarray(kappa, dtype=np.float64)
    cdef Py_ssize_t nx = vv.shape[0], nk = ka.shape[0]
    cdef Py_ssize_t mid = nx // 2
    out = np.empty(nk, dtype=np.float64)
    cdef double[::1] w = out
    cdef double c1 = h * h / 12.0, c2 = 5.0 * h * h / 6.0
    cdef Py_ssize_t j, c
    cdef double k2, t, th, prev, curr, nxt, scale
    cdef double ul_mid, ul_next, ur_mid, ur_next, a, s
    for c in range(nk):
        k2 = ka[c] * ka[c]
        t = k2 * h * h
        th = acosh((1.0 + 5.0 * t / 12.0) / (1.0 - t / 12.0))
        # left-growing solution up to mid+1
        prev = 1.0
        curr = exp(th)
        for j in range(1, mid + 1):
            nxt = ((2.0 + c2 * (vv[j] + k2)) * curr
                   - (1.0 - c1 * (vv[j - 1] + k2)) * prev) \
                  / (1.0 - c1 * (vv[j + 1] + k2))
            prev = curr
            curr = nxt
            if fabs(curr) > RENORM:
                scale = fabs(curr)
                curr /= scale
                prev /= scale
        ul_mid = prev
        ul_next = curr
        # right-decaying solution down to mid
        prev = 1.0
        curr = exp(th)
        for j in range(nx - 2, mid, -1):
            nxt = ((2.0 + c2 * (vv[j] + k2)) * curr
                   - (1.0 - c1 * (vv[j + 1] + k2)) * prev) \
                  / (1.0 - c1 * (vv[j - 1] + k2))
            prev = curr
            curr = nxt
            if fabs(curr) > RENORM:
                scale = fabs(curr)
                curr /= scale
                prev /= scale
        ur_next = prev
        ur_mid = curr
        a = (1.0 - c1 * (vv[mid] + k2)) * (1.0 - c1 * (vv[mid + 1] + k2))
        s = fabs(ul_mid * ur_next) + fabs(ul_next * ur_mid)
        if s < 1e-300:
            s = 1e-300
        w[c] = a * (ul_mid * ur_next - ul_next * ur_mid) / s
    return out
