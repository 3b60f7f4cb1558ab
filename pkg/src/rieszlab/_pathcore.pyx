# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled path kernels for horizontal Brownian motion on the Heisenberg group."""

import numpy as np

from libc.math cimport exp, sqrt, cos, sin, M_PI

cdef double PI_M14 = 0.7511255444649425  # pi ** -0.25


cdef inline void _hermite(int N, double x, double* out) noexcept nogil:
    cdef int k
    out[0] = PI_M14 * exp(-0.5 * x * x)
    if N > 1:
        out[1] = sqrt(2.0) * x * out[0]
    for k in range(2, N):
        out[k] = sqrt(2.0 / k) * x * out[k - 1] - sqrt((k - 1.0) / k) * out[k - 2]


def heisenberg_paths(double[::1] x, double[::1] y, double[::1] z,
                     const double[:, ::1] dB1, const double[:, ::1] dB2,
                     const double[:, ::1] dA):
    """Advance states in place through all increments."""
    cdef Py_ssize_t p, k
    cdef Py_ssize_t P = dB1.shape[0], S = dB1.shape[1]
    cdef double xp, yp
    with nogil:
        for p in range(P):
            for k in range(S):
                xp = x[p]
                yp = y[p]
                z[p] += 0.5 * (xp * dB2[p, k] - yp * dB1[p, k]) + dA[p, k]
                x[p] = xp + dB1[p, k]
                y[p] = yp + dB2[p, k]


def martingale_paths(double[::1] x, double[::1] y, double[::1] z,
                     const double[:, ::1] dB1, const double[:, ::1] dB2,
                     const double[:, ::1] dA,
                     const double complex[:, :, ::1] K1,
                     const double complex[:, :, ::1] K2,
                     double lam, double scale):
    """Itô sums of ``e^{i lam z} (H_x K_k H_y)`` against the driving increments.

    States are advanced in place; returns the complex integral per path.
    """
    cdef Py_ssize_t P = dB1.shape[0], S = dB1.shape[1]
    cdef int N = K1.shape[1]
    cdef Py_ssize_t p, k
    cdef int a, b
    cdef double xp, yp, zp
    cdef double complex v1, v2, row1, row2, ph
    out = np.zeros(P, dtype=np.complex128)
    cdef double complex[::1] acc = out
    hx_arr = np.empty(N)
    hy_arr = np.empty(N)
    cdef double[::1] hx = hx_arr
    cdef double[::1] hy = hy_arr
    with nogil:
        for p in range(P):
            for k in range(S):
                xp = x[p]
                yp = y[p]
                zp = z[p]
                _hermite(N, scale * xp, &hx[0])
                _hermite(N, scale * yp, &hy[0])
                v1 = 0
                v2 = 0
                for a in range(N):
                    row1 = 0
                    row2 = 0
                    for b in range(N):
                        row1 = row1 + K1[k, a, b] * hy[b]
                        row2 = row2 + K2[k, a, b] * hy[b]
                    v1 = v1 + hx[a] * row1
                    v2 = v2 + hx[a] * row2
                ph = cos(lam * zp) + 1j * sin(lam * zp)
                acc[p] = acc[p] + ph * (v1 * dB1[p, k] + v2 * dB2[p, k])
                z[p] = zp + 0.5 * (xp * dB2[p, k] - yp * dB1[p, k]) + dA[p, k]
                x[p] = xp + dB1[p, k]
                y[p] = yp + dB2[p, k]
    return out
