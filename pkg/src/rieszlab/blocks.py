"""Finite-dimensional invariant subspaces on which X, Y, Z act as matrices.

A :class:`Block` holds the matrices of the left-invariant fields acting on a
basis of functions, in column convention: ``field(f_k) = sum_i M[i, k] f_i``.
Products of fields are then matrix products in the same order.

Heisenberg fibers ``e^{i lam z} g(x, y)`` are truncated to a tensor Hermite
basis. The truncated operators are exact on coefficient vectors whose
per-copy Hermite degree is at most ``N - 1 - pad`` (the padded sub-block, see
:attr:`Block.mask`), as long as at most ``pad`` raising steps are applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce

import numpy as np
from scipy import sparse
from scipy.linalg import expm

PINV_CUTOFF = 1e-10
DIVERGENCE_TOL = 1e-10
HEAT_EXP_LIMIT = 700.0


class DivergentCoupling(ValueError):
    """A non-negligible coefficient sits on a non-decaying eigen-pair."""


@dataclass(frozen=True, eq=False)
class Block:
    xs: tuple[np.ndarray, ...]
    ys: tuple[np.ndarray, ...]
    Z: np.ndarray
    group: str
    rho: int
    meta: dict = field(default_factory=dict)
    mask: np.ndarray | None = None

    @property
    def X(self) -> np.ndarray:
        return self.xs[0]

    @property
    def Y(self) -> np.ndarray:
        return self.ys[0]

    @property
    def dim(self) -> int:
        return self.Z.shape[0]

    @property
    def copies(self) -> int:
        return len(self.xs)

    @property
    def label(self) -> str:
        if self.group == "su2":
            return f"su2[j={self.meta['j']}]"
        if self.group == "sl2":
            return f"sl2[d={self.meta['d']}]"
        return f"heisenberg[lam={self.meta['lam']:g},n={self.meta['n']},N={self.meta['N']}]"

    @property
    def normal(self) -> bool:
        return self.group != "sl2"

    @cached_property
    def gradients(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """``(X_j - i Y_j, X_j + i Y_j)`` for each copy."""
        return tuple((X - 1j * Y, X + 1j * Y) for X, Y in zip(self.xs, self.ys))

    @cached_property
    def L(self) -> np.ndarray:
        if self.group == "heisenberg" and self.copies > 1:
            L1 = self._single_copy().L
            eye = np.eye(L1.shape[0])
            return reduce(lambda acc, k: acc + reduce(np.kron, [L1 if i == k else eye
                                                                 for i in range(self.copies)]),
                          range(self.copies), 0)
        return build_L(self)

    def _single_copy(self) -> "Block":
        m = self.meta
        return heisenberg_fiber(m["lam"], 1, m["N"], m["pad"])

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(Lambda, V, V^{-1})`` with ``L = V diag(Lambda) V^{-1}``.

        Multi-copy Heisenberg fibers use ``L = sum_j L_j`` with commuting
        copies, so the eigenbasis is a tensor product of single-copy ones.
        """
        if self.group == "heisenberg" and self.copies > 1:
            lam1, V1, _ = self._single_copy().spectrum
            lam = reduce(lambda a, b: (a[:, None] + b[None, :]).ravel(), [lam1] * self.copies)
            V = reduce(np.kron, [V1] * self.copies)
            return lam, V, V.conj().T
        L = self.L
        if self.normal:
            lam, V = np.linalg.eigh(0.5 * (L + L.conj().T))
            return lam.astype(complex), V, V.conj().T
        lam, V = np.linalg.eig(L)
        order = np.lexsort((lam.imag, lam.real))
        lam, V = lam[order], V[:, order]
        return lam, V, np.linalg.inv(V)

    def cols(self) -> np.ndarray:
        """Column selector of the exact (padded) sub-block."""
        if self.mask is None:
            return np.arange(self.dim)
        return np.flatnonzero(self.mask)


def _half(j) -> Fraction:
    twice = 2 * float(j)
    if twice < 0 or abs(twice - round(twice)) > 1e-12:
        raise ValueError(f"spin must be a nonnegative half-integer, got {j}")
    j = Fraction(round(twice), 2)
    if j < 0:
        raise ValueError(f"spin must be a nonnegative half-integer, got {j}")
    return j


def su2_block(j) -> Block:
    """Spin-``j`` block, basis ordered by weight m = j, j-1, ..., -j.

    ``X = i J_y``, ``Y = i J_x``, ``Z = i J_z``; for j = 1/2 these are the
    Pauli-type matrices of SU(2) themselves.
    """
    j = _half(j)
    d = int(2 * j + 1)
    m = np.array([float(j) - k for k in range(d)])
    jf = float(j)
    # J_+ e_m = sqrt(j(j+1) - m(m+1)) e_{m+1}; e_{m+1} sits one index above e_m
    Jp = np.zeros((d, d), complex)
    for k in range(1, d):
        Jp[k - 1, k] = math.sqrt(jf * (jf + 1) - m[k] * (m[k] + 1))
    Jm = Jp.T.copy()
    Jx = 0.5 * (Jp + Jm)
    Jy = -0.5j * (Jp - Jm)
    Jz = np.diag(m).astype(complex)
    meta = {"j": str(j), "weights": m.tolist()}
    return Block((1j * Jy,), (1j * Jx,), 1j * Jz, "su2", 1, meta)


def sl2_block(d: int) -> Block:
    """The ``d``-dimensional irreducible representation of sl(2).

    ``X = H/2``, ``Y = (E + F)/2``, ``Z = (E - F)/2`` in the weight basis of H.
    """
    if d < 1:
        raise ValueError("representation dimension must be positive")
    H = np.diag([d - 1 - 2.0 * k for k in range(d)]).astype(complex)
    E = np.zeros((d, d), complex)
    F = np.zeros((d, d), complex)
    for k in range(1, d):
        E[k - 1, k] = math.sqrt(k * (d - k))
    for k in range(d - 1):
        F[k + 1, k] = math.sqrt((k + 1) * (d - 1 - k))
    return Block((0.5 * H,), (0.5 * (E + F),), 0.5 * (E - F), "sl2", -1, {"d": d})


def ladder(N: int) -> np.ndarray:
    """Lowering matrix of the 1D Hermite basis: ``A[k-1, k] = sqrt(k)``."""
    return np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1)


def fiber_scale(lam: float) -> float:
    return math.sqrt(abs(lam) / 2) if lam != 0 else 1.0


def position_derivative(N: int, scale: float) -> tuple[np.ndarray, np.ndarray]:
    """Position and derivative matrices on ``h_k(scale * x)``."""
    A = ladder(N)
    Q = (A + A.T) / (math.sqrt(2) * scale)
    D = scale * (A - A.T) / math.sqrt(2)
    return Q, D


def _kron_at(op: np.ndarray, axis: int, axes: int, N: int) -> np.ndarray:
    eye = sparse.identity(N, format="csr")
    mats = [sparse.csr_matrix(op) if a == axis else eye for a in range(axes)]
    return reduce(lambda x, y: sparse.kron(x, y, format="csr"), mats).toarray()


def heisenberg_fiber(lam: float, n: int = 1, N: int = 24, pad: int = 6) -> Block:
    """Fiber ``e^{i lam z} g(x, y)`` of H^n on a tensor Hermite basis.

    Axes are ordered ``(x_1, y_1, x_2, y_2, ...)``, each truncated to ``N``
    functions ``h_k(s x)`` with ``s = sqrt(|lam|/2)`` (``s = 1`` when lam = 0).
    On the fiber ``X_j = D_{x_j} - i lam/2 Q_{y_j}`` and
    ``Y_j = D_{y_j} + i lam/2 Q_{x_j}``.
    """
    if n < 1:
        raise ValueError("need at least one copy")
    if pad < 2 or N < pad + 2:
        raise ValueError(f"pad too small or N too small: need 2 <= pad <= N - 2, got N={N}, pad={pad}")
    axes = 2 * n
    if N ** axes > 6000:
        raise ValueError(f"fiber block of dimension {N ** axes} is too large for dense algebra")
    s = fiber_scale(lam)
    Q, D = position_derivative(N, s)
    xs, ys = [], []
    for j in range(n):
        ax, ay = 2 * j, 2 * j + 1
        Dx, Dy = _kron_at(D, ax, axes, N), _kron_at(D, ay, axes, N)
        Qx, Qy = _kron_at(Q, ax, axes, N), _kron_at(Q, ay, axes, N)
        xs.append(Dx - 0.5j * lam * Qy)
        ys.append(Dy + 0.5j * lam * Qx)
    dim = N ** axes
    idx = np.indices((N,) * axes).reshape(axes, -1)
    degree = np.stack([idx[2 * j] + idx[2 * j + 1] for j in range(n)])
    mask = np.all(degree <= N - 1 - pad, axis=0)
    meta = {"lam": float(lam), "n": n, "N": N, "pad": pad, "scale": s}
    return Block(tuple(xs), tuple(ys), 1j * lam * np.eye(dim), "heisenberg", 0, meta, mask)


def build_L(b: Block) -> np.ndarray:
    return sum(X @ X + Y @ Y for X, Y in zip(b.xs, b.ys))


def casimir(b: Block) -> np.ndarray:
    """``X^2 + Y^2 + rho Z^2`` (scalar on irreducible su2 / sl2 blocks)."""
    return b.X @ b.X + b.Y @ b.Y + b.rho * (b.Z @ b.Z)


def heat(b: Block, t: float) -> np.ndarray:
    """``e^{tL}`` on the block."""
    if b.group != "sl2" and t < 0:
        raise ValueError("heat semigroup needs t >= 0")
    lam, V, Vi = b.spectrum
    if np.max(t * lam.real) > HEAT_EXP_LIMIT:
        raise OverflowError(f"heat semigroup overflow on {b.label} at t={t}")
    if b.normal:
        return (V * np.exp(t * lam)) @ Vi
    return expm(t * b.L)


def heat_apply(b: Block, t: float, M: np.ndarray | None = None, cols=None) -> np.ndarray:
    """``e^{tL} M`` without forming the full semigroup matrix.

    With ``M=None`` returns the columns ``cols`` of ``e^{tL}``.
    """
    if b.group != "sl2" and t < 0:
        raise ValueError("heat semigroup needs t >= 0")
    lam, V, Vi = b.spectrum
    if np.max(t * lam.real) > HEAT_EXP_LIMIT:
        raise OverflowError(f"heat semigroup overflow on {b.label} at t={t}")
    if M is None:
        if not b.normal:
            return expm(t * b.L)[:, cols]
        T = Vi[:, cols]
    elif b.normal:
        T = np.asarray(Vi @ M)
    else:
        return np.asarray(expm(t * b.L) @ M)
    e = np.exp(t * lam)
    return V @ (e.reshape((-1,) + (1,) * (T.ndim - 1)) * T)


def _kernel_mask(lam: np.ndarray, shift: float) -> tuple[np.ndarray, np.ndarray]:
    mu = -lam + shift
    scale = np.abs(mu).max() if mu.size else 0.0
    ker = np.abs(mu) <= PINV_CUTOFF * max(scale, 1e-300)
    inv = np.where(ker, 0.0, 1.0 / np.where(ker, 1.0, mu))
    return inv, ker


def resolvent_apply(b: Block, shift: float, M: np.ndarray) -> tuple[np.ndarray, int, np.ndarray]:
    """``(pinv(-L + shift) M, kernel_dim, P_ker M)`` for a thin matrix ``M``."""
    lam, V, Vi = b.spectrum
    inv, ker = _kernel_mask(lam, shift)
    T = Vi @ M
    return V @ (inv[:, None] * T), int(ker.sum()), V @ (ker[:, None] * T)


def spectral_pinv(b: Block, shift: float) -> tuple[np.ndarray, int, np.ndarray]:
    """Spectral pseudo-inverse of ``-L + shift``.

    Returns ``(R, kernel_dim, P_ker)`` where eigenvalues below
    ``PINV_CUTOFF * max|eig|`` are treated as kernel.
    """
    lam, V, Vi = b.spectrum
    inv, ker = _kernel_mask(lam, shift)
    R = (V * inv) @ Vi
    P = (V * ker) @ Vi
    return R, int(ker.sum()), P


def pair_integral(b: Block, C, alpha: float, tol: float = DIVERGENCE_TOL,
                  cols: np.ndarray | None = None) -> np.ndarray:
    """``int_0^inf e^{-2 alpha t} e^{tL} C e^{tL} dt`` in closed form.

    Solves the Sylvester equation ``(L - alpha) S + S (L - alpha) = -C`` on the
    eigenbasis of L. Entries coupling eigenvalues with
    ``Re(Lambda_i + Lambda_j - 2 alpha) >= 0`` must vanish to ``tol``.
    ``C`` may be a scipy sparse matrix; ``cols`` returns only those columns.
    """
    lam, V, Vi = b.spectrum
    if sparse.issparse(C):
        Ct = np.asarray((C.T @ Vi.T).T) @ V
    else:
        Ct = Vi @ C @ V
    denom = 2 * alpha - lam[:, None] - lam[None, :]
    divergent = denom.real <= 0
    if divergent.any():
        worst = np.abs(Ct[divergent]).max()
        if worst > tol:
            raise DivergentCoupling(
                f"divergent coupling on {b.label}: |C~| = {worst:.3e} on a non-decaying eigen-pair")
    St = np.where(divergent, 0.0, Ct / np.where(divergent, 1.0, denom))
    if cols is not None:
        return V @ (St @ Vi[:, cols])
    return V @ St @ Vi


def sylvester_residual(b: Block, S: np.ndarray, C: np.ndarray, alpha: float) -> float:
    A = b.L - alpha * np.eye(b.dim)
    return float(np.linalg.norm(A @ S + S @ A + C, 2))


def eig_index_value(n: int, k: int) -> float:
    """``lambda_{n,k} = k(k + |n| + 1) + |n|/2``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return k * (k + abs(n) + 1) + abs(n) / 2


def su2_index_map(j, m) -> tuple[int, int]:
    """Map a weight ``m`` of the spin-``j`` block to the index ``(n, k)``."""
    n = int(round(2 * float(m)))
    k = int(round(float(j) - abs(float(m))))
    return n, k


def hermite_functions(N: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite functions ``h_0 .. h_{N-1}`` at ``x``, stacked on axis 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty((N,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if N > 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(2, N):
        out[k] = math.sqrt(2.0 / k) * x * out[k - 1] - math.sqrt((k - 1) / k) * out[k - 2]
    return out
