"""NumPy fallback for the compiled path kernels, vectorized over paths."""

import numpy as np

from .blocks import hermite_functions


def heisenberg_paths(x, y, z, dB1, dB2, dA):
    for k in range(dB1.shape[1]):
        xp = x.copy()
        yp = y.copy()
        z += 0.5 * (xp * dB2[:, k] - yp * dB1[:, k]) + dA[:, k]
        x += dB1[:, k]
        y += dB2[:, k]


def martingale_paths(x, y, z, dB1, dB2, dA, K1, K2, lam, scale):
    N = K1.shape[1]
    acc = np.zeros(x.shape[0], dtype=np.complex128)
    for k in range(dB1.shape[1]):
        hx = hermite_functions(N, scale * x)
        hy = hermite_functions(N, scale * y)
        v1 = np.einsum("ap,ab,bp->p", hx, K1[k], hy)
        v2 = np.einsum("ap,ab,bp->p", hx, K2[k], hy)
        ph = np.cos(lam * z) + 1j * np.sin(lam * z)
        acc += ph * (v1 * dB1[:, k] + v2 * dB2[:, k])
        xp = x.copy()
        z += 0.5 * (xp * dB2[:, k] - y * dB1[:, k]) + dA[:, k]
        x += dB1[:, k]
        y += dB2[:, k]
    return acc
