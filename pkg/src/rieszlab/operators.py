"""Second order Riesz transforms on blocks, built along two independent routes.

The resolvent route uses the spectral pseudo-inverse of ``-L - rho + alpha``;
the Littlewood-Paley route integrates ``e^{tL} W W e^{tL}`` in closed form.
Residuals are spectral norms of matrix differences restricted to the exact
columns of the block.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import sparse

from .blocks import Block, heat_apply, pair_integral, resolvent_apply, spectral_pinv

KERNEL_COUPLING_TOL = 1e-10


class KernelCoupling(ValueError):
    """W maps mass through the kernel of the shifted sub-Laplacian."""


@dataclass(frozen=True)
class OperatorSpec:
    a: float
    b: float
    c: float
    alpha: float = 0.0
    rho: int = 1
    p: float = 2.0

    def __post_init__(self):
        if not 1 < self.p < math.inf:
            raise ValueError(f"p must lie in (1, inf), got {self.p}")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")

    @property
    def p_star(self) -> float:
        return p_star(self.p)


@dataclass
class IdentityReport:
    name: str
    block: str
    residual: float
    tolerance: float
    anchor: str = ""
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


@dataclass(frozen=True)
class BoundValues:
    theorem_bound: float
    per_piece_bound: float
    cot_bound: float
    tight_bound: float
    lemma31_bound: float | None = None


def p_star(p: float) -> float:
    return max(p, p / (p - 1))


def restricted_norm(M: np.ndarray, b: Block) -> float:
    """Spectral norm of ``M`` on the exact columns of ``b``."""
    return float(np.linalg.norm(M[:, b.cols()], 2))


def _norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def complex_gradient(b: Block, j: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """``(W, Wbar) = (X_j - i Y_j, X_j + i Y_j)``."""
    return b.gradients[j]


def intertwining_residuals(b: Block) -> dict[str, float]:
    """Residuals of ``W L = (L + 2iZ + rho) W`` and ``W Z = (Z - i rho) W``."""
    L, Z = b.L, b.Z
    cols = b.cols()
    Lc, Zc = L[:, cols], Z[:, cols]
    out = {}
    for j in range(b.copies):
        W, _ = complex_gradient(b, j)
        Wc = W[:, cols]
        suffix = "" if b.copies == 1 else f"[{j}]"
        out["WL" + suffix] = _norm(W @ Lc - (L @ Wc + 2j * (Z @ Wc) + b.rho * Wc))
        out["WZ" + suffix] = _norm(W @ Zc - (Z @ Wc - 1j * b.rho * Wc))
    return out


def riesz2_resolvent(b: Block, alpha: float, j: int = 0, k: int = 0,
                     tol: float = KERNEL_COUPLING_TOL, cols=None) -> tuple[np.ndarray, int]:
    """``W_j pinv(-L - rho + alpha) W_k`` and the kernel dimension used.

    With ``cols`` only those columns are formed.
    """
    Wj, _ = complex_gradient(b, j)
    Wk, _ = complex_gradient(b, k)
    sel = np.arange(b.dim) if cols is None else cols
    RW, kdim, PW = resolvent_apply(b, alpha - b.rho, Wk[:, sel])
    if kdim:
        leak = _norm((Wj @ PW)[:, b.cols()] if cols is None else Wj @ PW)
        if leak > tol:
            raise KernelCoupling(f"W maps mass through ker(-L - rho + alpha) on {b.label}: {leak:.3e}")
    return Wj @ RW, kdim


def riesz2_integral(b: Block, alpha: float, j: int = 0, k: int = 0, cols=None) -> np.ndarray:
    """``2 int_0^inf e^{-2 alpha t} e^{tL} W_j W_k e^{tL} dt``."""
    Wj, _ = complex_gradient(b, j)
    Wk, _ = complex_gradient(b, k)
    C = sparse.csr_matrix(Wj) @ sparse.csr_matrix(Wk)
    return 2 * pair_integral(b, C, alpha, cols=cols)


def two_route_residual(b: Block, alpha: float, j: int = 0, k: int = 0) -> IdentityReport:
    cols = b.cols()
    R, kdim = riesz2_resolvent(b, alpha, j, k, cols=cols)
    S = riesz2_integral(b, alpha, j, k, cols=cols)
    return IdentityReport("two-route", b.label, _norm(S - R), 1e-8,
                          notes={"alpha": alpha, "kernel_dim": kdim, "j": j, "k": k})


def shift_identity_residual(b: Block, t: float) -> dict[str, float]:
    """Residuals of the semigroup shift laws on ``b``.

    Heisenberg fibers: ``W e^{tL} = c e^{tL} W`` with
    ``c = e^{2 lam t}`` ("plus") and ``c = e^{-2 lam t}`` ("minus"); only the
    second follows from ``W L = (L + 2iZ) W``. su2 / sl2:
    ``e^{tL} W W e^{tL} = e^{2 rho t} W e^{2tL} W`` ("pairing"), and on su2 the
    weight-wise law ``W e^{tL} v = e^{-(2m + 1) t} e^{tL} W v`` for ``Z v = i m v``.
    """
    W, _ = complex_gradient(b)
    W = sparse.csr_matrix(W)
    cols = b.cols()
    Wc = W[:, cols]
    Pt = heat_apply(b, t, cols=cols)
    WPt = W @ Pt
    PtW = heat_apply(b, t, Wc)
    out = {}
    if b.group == "heisenberg":
        lam = b.meta["lam"]
        out["plus"] = _norm(WPt - math.exp(2 * lam * t) * PtW)
        out["minus"] = _norm(WPt - math.exp(-2 * lam * t) * PtW)
        return out
    lhs = heat_apply(b, t, W @ (W @ Pt))
    rhs = math.exp(2 * b.rho * t) * (W @ heat_apply(b, 2 * t, Wc))
    out["pairing"] = _norm(lhs - rhs)
    if b.group == "su2":
        m = np.diag(b.Z).imag[cols]
        out["WPt"] = _norm(WPt - PtW * np.exp(-(2 * m + 1) * t)[None, :])
    return out


def s_abc_parts(b: Block, alpha: float) -> dict[str, np.ndarray]:
    X, Y, Z = b.X, b.Y, b.Z
    R0, _, _ = spectral_pinv(b, alpha)
    R, _, _ = spectral_pinv(b, alpha - b.rho)
    return {
        "a": R0 @ Z,
        "b": X @ R @ X - Y @ R @ Y,
        "c": X @ R @ Y + Y @ R @ X,
    }


def build_S_abc(b: Block, spec: OperatorSpec) -> np.ndarray:
    """``a (-L+alpha)^+ Z + b (X R X - Y R Y) + c (X R Y + Y R X)``, ``R = (-L-rho+alpha)^+``."""
    parts = s_abc_parts(b, spec.alpha)
    return spec.a * parts["a"] + spec.b * parts["b"] + spec.c * parts["c"]


def real_imag_residual(b: Block, alpha: float) -> float:
    """Check the b- and c-parts against ``W R W`` and ``Wbar R Wbar``.

    ``W R W = B - i C`` and ``Wbar R Wbar = B + i C``.
    """
    parts = s_abc_parts(b, alpha)
    W, Wb = complex_gradient(b)
    R, _, _ = spectral_pinv(b, alpha - b.rho)
    WRW, WbRWb = W @ R @ W, Wb @ R @ Wb
    res = (
        (WRW + WbRWb) / 2 - parts["b"],
        (WbRWb - WRW) / 2j - parts["c"],
    )
    return max(restricted_norm(r, b) for r in res)


def S_A_operator(b: Block, A, alpha: float) -> np.ndarray:
    """``int_0^inf e^{-2 alpha t} e^{tL} (a11 X^2 + a12 XY + a21 YX + a22 Y^2) e^{tL} dt``."""
    A = np.asarray(A, dtype=complex)
    X, Y = b.X, b.Y
    C = A[0, 0] * X @ X + A[0, 1] * X @ Y + A[1, 0] * Y @ X + A[1, 1] * Y @ Y
    return pair_integral(b, C, alpha)


def matrix_norm(A) -> float:
    """Operator norm of ``A`` acting on real vectors, ``sup |A v| / |v|`` over real v.

    This is the norm that controls martingale transforms of real martingales;
    it equals the spectral norm when ``A`` is real.
    """
    A = np.asarray(A, dtype=complex)
    G = (A.conj().T @ A).real
    return float(math.sqrt(max(np.linalg.eigvalsh(0.5 * (G + G.T)).max(), 0.0)))


def martingale_matrix(n: int, j: int, k: int) -> np.ndarray:
    """The ``2n x 2n`` matrix ``A_jk`` (zero-based j, k) representing ``-W_j W_k``."""
    A = np.zeros((2 * n, 2 * n), complex)
    A[j, k] = -1
    A[j, n + k] = 1j
    A[n + j, k] = 1j
    A[n + j, n + k] = 1
    return A


def bound_value(spec: OperatorSpec, A=None) -> BoundValues:
    ps = spec.p_star
    tight = (abs(spec.a) + math.hypot(spec.b, spec.c)) * (ps - 1)
    lemma = None if A is None else 0.5 * (ps - 1) * matrix_norm(A)
    return BoundValues(
        theorem_bound=(abs(spec.a) + abs(spec.b) + abs(spec.c)) * (ps - 1),
        per_piece_bound=math.sqrt(2) * (ps - 1),
        cot_bound=1 / math.tan(math.pi / (2 * ps)),
        tight_bound=tight,
        lemma31_bound=lemma,
    )


def identity_suite(blocks, alphas=(0.0,), ts=(0.1, 0.5, 1.0)) -> list[IdentityReport]:
    """Run the intertwining, two-route and shift identities over ``blocks``.

    Reports are ordered by (identity, block) for deterministic merging.
    """
    reports = []
    for b in blocks:
        for key, res in intertwining_residuals(b).items():
            reports.append(IdentityReport(f"intertwining:{key}", b.label, res, 1e-10))
        for alpha in alphas:
            try:
                reports.append(two_route_residual(b, alpha))
            except ValueError as exc:
                reports.append(IdentityReport("two-route", b.label, math.inf, 1e-8,
                                              notes={"alpha": alpha, "error": str(exc)}))
        for t in ts:
            for key, res in shift_identity_residual(b, t).items():
                reports.append(IdentityReport(f"shift:{key}", b.label, res, 1e-9, notes={"t": t}))
    reports.sort(key=lambda r: (r.name, r.block))
    return reports
