"""Green function and Beurling-Ahlfors kernel on the Heisenberg group.

``green`` and ``ba_kernel`` return the customary closed forms.
That Green function is half of the fundamental solution of ``-L``
(``int G (-L phi) = phi(0) / 2``), so the operator ``W (-L)^{-1} W`` has kernel
``2 K``. :func:`apply_BA_pv` integrates against ``2 K``; with that
normalization integrating out z gives exactly the planar kernel ``1/(pi w^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .blocks import Block, _kron_at, hermite_functions, position_derivative, spectral_pinv
from .lie_models import (FD_STEP_SECOND, HEISENBERG, heis_from_matrix, heis_mul, heis_to_matrix,
                         left_invariant_derivative, right_invariant_derivative)

FD_STEP_KERNEL = 1e-3
KERNEL_SINGULAR_RADIUS = 0.3
FUNDAMENTAL_FACTOR = 2.0

Func3 = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


class PVUnresolved(RuntimeError):
    """Richardson extrapolation of the principal value did not settle."""


def koranyi_norm(x, y, z):
    """Homogeneous norm ``((x^2 + y^2)^2 + 16 z^2)^(1/4)``."""
    x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
    return ((x * x + y * y) ** 2 + 16 * z * z) ** 0.25


def _require_off_origin(rho):
    if np.any(np.asarray(rho) == 0):
        raise ZeroDivisionError("kernel evaluated at the origin")


def green(x, y, z):
    """``1 / (4 pi sqrt((x^2+y^2)^2 + 16 z^2))``."""
    rho = koranyi_norm(x, y, z)
    _require_off_origin(rho)
    return 1.0 / (4 * math.pi * rho ** 2)


def fundamental_solution(x, y, z):
    """Fundamental solution of ``-L``: ``FUNDAMENTAL_FACTOR * green``."""
    return FUNDAMENTAL_FACTOR * green(x, y, z)


def ba_kernel(r, theta, z):
    """``r^2 e^{-2i theta} / (pi (r^4 + 16 z^2)^{3/2})``."""
    r, theta, z = np.asarray(r, float), np.asarray(theta, float), np.asarray(z, float)
    q = r ** 4 + 16 * z * z
    _require_off_origin(q)
    return r * r * np.exp(-2j * theta) / (math.pi * q ** 1.5)


def ba_kernel_xyz(x, y, z):
    x, y = np.asarray(x, float), np.asarray(y, float)
    return ba_kernel(np.hypot(x, y), np.arctan2(y, x), z)


def _on_matrix(F: Func3) -> Callable[[np.ndarray], complex]:
    def f(g):
        x, y, z = heis_from_matrix(g)
        return complex(F(x, y, z))
    return f


def w_what_fd(F: Func3, point, h: float = FD_STEP_KERNEL) -> complex:
    """``W What F`` at ``point`` by nested central differences of group translations.

    ``What`` uses right translations ``exp(sA) g`` and ``W`` left translations
    ``g exp(sA)``; the two commute, so the nesting order is immaterial.
    """
    X, Y = HEISENBERG.X, HEISENBERG.Y
    f = _on_matrix(F)

    def what_f(g):
        return (right_invariant_derivative(f, g, X, h)
                - 1j * right_invariant_derivative(f, g, Y, h))

    g0 = heis_to_matrix(point)
    return (left_invariant_derivative(what_f, g0, X, h)
            - 1j * left_invariant_derivative(what_f, g0, Y, h))


def sublaplacian_fd(F: Func3, point, h: float = FD_STEP_SECOND) -> complex:
    """``(X^2 + Y^2) F`` at ``point`` by second differences along ``g exp(sA)``."""
    p = np.asarray(point, float)
    total = -4 * F(*p)
    for step in (np.array([h, 0, 0]), np.array([0, h, 0])):
        # exp(s X) is the coordinate point (s, 0, 0); same for Y
        total = total + F(*heis_mul(p, step)) + F(*heis_mul(p, -step))
    return complex(total / (h * h))


def harmonicity_residual(point, F: Func3 = green, h: float = FD_STEP_SECOND) -> float:
    """``|L F(point)|`` by finite differences; ``F`` defaults to the Green function."""
    if koranyi_norm(*point) < KERNEL_SINGULAR_RADIUS:
        raise ValueError("point too close to the origin for a stable finite difference")
    return abs(sublaplacian_fd(F, point, h))


def kernel_fd_residuals(points, h: float = FD_STEP_KERNEL) -> np.ndarray:
    """``|W What G - K|`` at each point (x, y, z)."""
    out = []
    for p in points:
        val = w_what_fd(green, p, h)
        out.append(abs(val - complex(ba_kernel_xyz(*p))))
    return np.array(out)


# -- principal values ---------------------------------------------------------

@dataclass(frozen=True)
class PVResult:
    value: complex
    estimates: tuple[complex, ...]
    eps: tuple[float, ...]
    diagnostic: float
    tail: float

    @property
    def converged(self) -> bool:
        return self.diagnostic <= 1e-5 * max(1.0, abs(self.value))


def _trapezoid_theta(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def _gl(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _richardson(vals: list[complex], eps: list[float]) -> tuple[complex, float]:
    """Eliminate the ``eps^2`` and ``eps^4`` error terms from three halvings."""
    a, b, c = vals
    r1 = (4 * b - a) / 3
    r2 = (4 * c - b) / 3
    best = (16 * r2 - r1) / 15
    return best, abs(best - r2)


def _translated(f: Func3, g, x, y, z):
    if g is None:
        return f(x, y, z)
    g = np.asarray(g, float)
    gx, gy, gz = g
    return f(gx + x, gy + y, gz + z + 0.5 * (gx * y - gy * x))


def _ball_shell(f: Func3, g, lo: float, hi: float, n_rho: int, n_phi: int, n_theta: int) -> complex:
    """``int 2K f(g.x)`` over ``lo < |x| < hi`` in Koranyi polar coordinates.

    With ``r = rho sqrt(cos phi)`` and ``z = rho^2 sin(phi)/4`` the measure
    ``2K dx`` becomes ``cos(phi) e^{-2i theta} / (2 pi rho) drho dphi dtheta``.
    """
    rho, wr = _gl(n_rho, lo, hi)
    phi, wp = _gl(n_phi, -np.pi / 2, np.pi / 2)
    th = _trapezoid_theta(n_theta)
    R, P, T = np.meshgrid(rho, phi, th, indexing="ij")
    cp = np.cos(P)
    r = R * np.sqrt(cp)
    x, y, z = r * np.cos(T), r * np.sin(T), R * R * np.sin(P) / 4
    vals = _translated(f, g, x, y, z) * cp * np.exp(-2j * T) / (2 * np.pi * R)
    w = wr[:, None, None] * wp[None, :, None] * (2 * np.pi / n_theta)
    return complex(np.sum(vals * w))


def _outside_ball(f: Func3, g, rho0: float, R: float, n_r: int, n_z: int, n_theta: int) -> complex:
    """``int 2K f(g.x)`` over ``|x| > rho0`` with cylindrical radius ``r < R``."""
    th = _trapezoid_theta(n_theta)
    tau, wt = _gl(n_z, 0.0, np.pi / 2)
    # r in [0, rho0] through r = rho0 (1 - v^2), which smooths the sqrt in z_min
    v, wv = _gl(n_r, 0.0, 1.0)
    r_in = rho0 * (1 - v * v)
    w_in = wv * 2 * rho0 * v
    r_out, w_out = _gl(n_r, rho0, R) if R > rho0 else (np.empty(0), np.empty(0))
    r = np.concatenate([r_in, r_out])
    wr = np.concatenate([w_in, w_out])
    zmin = np.sqrt(np.maximum(rho0 ** 4 - r ** 4, 0.0)) / 4
    scale = np.maximum(r, rho0) ** 2 / 4
    Rg, Tg, Ug = np.meshgrid(r, th, tau, indexing="ij")
    zm = zmin[:, None, None]
    sc = scale[:, None, None]
    zpos = zm + sc * np.tan(Ug)
    jac = sc / np.cos(Ug) ** 2
    total = 0.0 + 0.0j
    for sgn in (1.0, -1.0):
        z = sgn * zpos
        x, y = Rg * np.cos(Tg), Rg * np.sin(Tg)
        k = FUNDAMENTAL_FACTOR * Rg ** 2 * np.exp(-2j * Tg) / (np.pi * (Rg ** 4 + 16 * z * z) ** 1.5)
        vals = _translated(f, g, x, y, z) * k * Rg * jac
        w = wr[:, None, None] * (2 * np.pi / n_theta) * wt[None, None, :]
        total += np.sum(vals * w)
    return complex(total)


def _tail_bound(f: Func3, g, R: float, n_theta: int = 16) -> float:
    """Crude bound for the region ``r > R``: ``int_R^{4R} 2 max|f| / r dr``.

    ``int |2K| dz = 1/(pi r^2)``, so a shell of radius r carries ``2/r dr``.
    """
    r, wr = _gl(16, R, 4 * R)
    th = _trapezoid_theta(n_theta)
    zs = np.linspace(-2 * R * R, 2 * R * R, 9)
    Rg, Tg, Zg = np.meshgrid(r, th, zs, indexing="ij")
    m = np.abs(_translated(f, g, Rg * np.cos(Tg), Rg * np.sin(Tg), Zg)).max(axis=(1, 2))
    return float(np.sum(wr * 2 * m / r))


def apply_BA_pv(f: Func3, g=None, eps: float = 0.1, R: float = 8.0, rho0: float = 1.0,
                n: int = 32, tol: float = 1e-5) -> PVResult:
    """Principal value of ``int 2K(x) f(g.x) dx`` (the operator ``W (-L)^{-1} W``).

    ``f`` takes broadcastable arrays ``(x, y, z)``. Korányi balls of radius
    eps, eps/2, eps/4 are excluded and the three values extrapolated.
    """
    if not 0 < eps < rho0 < R:
        raise ValueError("need 0 < eps < rho0 < R")
    outer = _outside_ball(f, g, rho0, R, 2 * n, 2 * n, n)
    epss = [eps, eps / 2, eps / 4]
    vals = [outer + _ball_shell(f, g, e, rho0, n, n, n) for e in epss]
    best, diag = _richardson(vals, epss)
    res = PVResult(best, tuple(vals), tuple(epss), diag, _tail_bound(f, g, R))
    if diag > tol * max(1.0, abs(best)):
        raise PVUnresolved(f"principal value unresolved: extrapolation change {diag:.3e}")
    return res


def classical_BA_at_origin(f: Callable[[np.ndarray, np.ndarray], np.ndarray], eps: float = 0.1,
                           R: float = 8.0, r0: float = 1.0, n: int = 48, tol: float = 1e-5) -> PVResult:
    """Principal value of ``(1/pi) int f(w) / w^2 dA(w)``; ``f`` takes ``(x, y)``."""
    if not 0 < eps < r0 < R:
        raise ValueError("need 0 < eps < r0 < R")
    th = _trapezoid_theta(n)

    def ring(lo, hi):
        r, wr = _gl(n, lo, hi)
        Rg, Tg = np.meshgrid(r, th, indexing="ij")
        vals = f(Rg * np.cos(Tg), Rg * np.sin(Tg)) * np.exp(-2j * Tg) / (np.pi * Rg)
        return complex(np.sum(vals * wr[:, None]) * 2 * np.pi / n)

    outer = ring(r0, R)
    epss = [eps, eps / 2, eps / 4]
    vals = [outer + ring(e, r0) for e in epss]
    best, diag = _richardson(vals, epss)
    r, wr = _gl(16, R, 4 * R)
    Rg, Tg = np.meshgrid(r, th, indexing="ij")
    tail = float(np.sum(wr * 2 * np.abs(f(Rg * np.cos(Tg), Rg * np.sin(Tg))).max(axis=1) / r))
    if diag > tol * max(1.0, abs(best)):
        raise PVUnresolved(f"principal value unresolved: extrapolation change {diag:.3e}")
    return PVResult(best, tuple(vals), tuple(epss), diag, tail)


def gaussian_test_function(x, y, z=None):
    """``-w^2 e^{-|w|^2}``; the Beurling-Ahlfors transform at 0 equals -1."""
    w = np.asarray(x) + 1j * np.asarray(y)
    out = -w * w * np.exp(-np.abs(w) ** 2)
    if z is not None:
        out = out * np.ones_like(np.asarray(z, float))
    return out


# -- fiber cross-check --------------------------------------------------------

def landau2_coefficients(b: Block) -> np.ndarray:
    """Hermite coefficients of ``(x + i y)^2 e^{-|lam| r^2 / 4}`` on a single-copy fiber."""
    if b.group != "heisenberg" or b.copies != 1:
        raise ValueError("needs a single-copy Heisenberg fiber")
    N, s = b.meta["N"], b.meta["scale"]
    Q, _ = position_derivative(N, s)
    Qx, Qy = _kron_at(Q, 0, 2, N), _kron_at(Q, 1, 2, N)
    e0 = np.zeros(b.dim, complex)
    e0[0] = math.sqrt(math.pi)
    M = Qx + 1j * Qy
    return M @ (M @ e0)


def fiber_values(b: Block, coeffs: np.ndarray, x, y, z=0.0) -> np.ndarray:
    """Evaluate ``e^{i lam z} sum c_ab h_a(s x) h_b(s y)`` on a single-copy fiber."""
    N, s, lam = b.meta["N"], b.meta["scale"], b.meta["lam"]
    hx = hermite_functions(N, s * np.asarray(x, float))
    hy = hermite_functions(N, s * np.asarray(y, float))
    C = coeffs.reshape(N, N)
    vals = np.einsum("ab,a...,b...->...", C, hx, hy)
    return vals * np.exp(1j * lam * np.asarray(z, float))


def fiber_ba_at_origin(b: Block) -> complex:
    """``W (-L)^{-1} W f (0)`` for ``f = e^{i lam z} (x+iy)^2 e^{-|lam| r^2/4}``."""
    c = landau2_coefficients(b)
    W = b.X - 1j * b.Y
    R, _, _ = spectral_pinv(b, 0.0)
    out = W @ (R @ (W @ c))
    return complex(fiber_values(b, out, 0.0, 0.0))


def fiber_test_function(lam: float) -> Func3:
    def f(x, y, z):
        w = np.asarray(x) + 1j * np.asarray(y)
        return w * w * np.exp(-abs(lam) * np.abs(w) ** 2 / 4 + 1j * lam * np.asarray(z))
    return f
