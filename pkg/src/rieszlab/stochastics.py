"""Horizontal Brownian motion and the martingale-transform pairing.

Heisenberg paths are exact in ``(x, y)``; the z increment over a step is
``(x dB2 - y dB1)/2`` plus an independent Gaussian stand-in for the Lévy
area with the exact variance ``(sigma^2 h / 2)^2``, which makes ``Var(z_T)``
exact. The driving noise has variance ``scale * h`` per step; with
``GENERATOR_SCALE = 2`` the path generator is ``L`` itself, which is the
convention in which the pairing carries the factor 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import pathcore
from .blocks import Block, heat, heisenberg_fiber, position_derivative, _kron_at
from .lie_models import ManifoldError, get_model
from .operators import martingale_matrix

GENERATOR_SCALE = 2.0
BATCH = 20_000
LEAKAGE_TOL = 0.01


class BoxTooSmall(RuntimeError):
    """Heat mass of g escapes the starting box; enlarge R."""


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def _batches(paths: int, batch: int = BATCH):
    start, k = 0, 0
    while start < paths:
        n = min(batch, paths - start)
        yield k, n
        start += n
        k += 1


@dataclass
class PathBundle:
    paths: int
    h: float
    T: float
    states: np.ndarray
    scale: float
    seed: int
    increments: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return int(round(self.T / self.h)) if self.h else 0


def _steps(T: float, h: float) -> int:
    if T < 0 or h <= 0:
        raise ValueError("need T >= 0 and h > 0")
    k = int(round(T / h))
    if T > 0 and (k < 100 or abs(k * h - T) > 1e-9 * T):
        raise ValueError("h must divide T into at least 100 steps")
    return k


def heisenberg_noise(rng: np.random.Generator, n: int, steps: int, h: float, scale: float):
    """Increments ``(dB1, dB2, dA)``; ``dA`` is the in-step Lévy area stand-in."""
    sd = math.sqrt(scale * h)
    dB1 = sd * rng.standard_normal((n, steps))
    dB2 = sd * rng.standard_normal((n, steps))
    dA = 0.5 * scale * h * rng.standard_normal((n, steps))
    return dB1, dB2, dA


def simulate_hbm_heisenberg(T: float, h: float, paths: int, seed: int = 0, scale: float = 1.0,
                            start=None, keep_increments: bool = False,
                            backend: str | None = None) -> PathBundle:
    """Horizontal Brownian motion on the Heisenberg group from ``start`` (default 0)."""
    steps = _steps(T, h)
    impl = pathcore.get_backend(backend)
    states = np.zeros((paths, 3))
    if start is not None:
        states[:] = np.asarray(start, float)
    incs = [] if keep_increments else None
    for k, n in _batches(paths):
        sl = slice(k * BATCH, k * BATCH + n)
        x, y, z = (np.ascontiguousarray(states[sl, i]) for i in range(3))
        if steps:
            dB1, dB2, dA = heisenberg_noise(_rng(seed, k), n, steps, h, scale)
            impl.heisenberg_paths(x, y, z, dB1, dB2, dA)
            if incs is not None:
                incs.append(np.stack([dB1, dB2, dA], axis=-1))
        states[sl] = np.stack([x, y, z], axis=1)
    inc = np.concatenate(incs) if incs else None
    return PathBundle(paths, h, T, states, scale, seed, inc, {"group": "heisenberg"})


def _exp_traceless(M: np.ndarray) -> np.ndarray:
    """``exp`` of a stack of traceless 2x2 matrices: ``M^2 = delta I``."""
    delta = -(M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0])
    root = np.sqrt(delta.astype(complex))
    small = np.abs(root) < 1e-8
    c = np.where(small, 1 + delta / 2, np.cosh(root))
    s = np.where(small, 1 + delta / 6, np.sinh(root) / np.where(small, 1, root))
    eye = np.eye(2)[None]
    return c[:, None, None] * eye + s[:, None, None] * M


def simulate_hbm_group(model, T: float, h: float, paths: int, seed: int = 0,
                       scale: float = GENERATOR_SCALE, drift_tol: float = 1e-8) -> PathBundle:
    """Geometric Euler scheme ``Y <- Y exp(dB1 X + dB2 Y)`` on SU(2) or SL(2)."""
    m = get_model(model)
    if m.name == "heisenberg":
        return simulate_hbm_heisenberg(T, h, paths, seed, scale)
    steps = _steps(T, h)
    states = np.broadcast_to(np.eye(2, dtype=complex), (paths, 2, 2)).copy()
    sd = math.sqrt(scale * h)
    for k, n in _batches(paths):
        rng = _rng(seed, k)
        sl = slice(k * BATCH, k * BATCH + n)
        Y = states[sl]
        for _ in range(steps):
            xi = sd * rng.standard_normal((n, 2))
            Y = Y @ _exp_traceless(xi[:, 0, None, None] * m.X + xi[:, 1, None, None] * m.Y)
        states[sl] = Y
    drift = manifold_drift(states, m.name)
    if drift > drift_tol * max(steps, 1):
        raise ManifoldError(f"path drift {drift:.3e} left the group manifold")
    return PathBundle(paths, h, T, states, scale, seed, None, {"group": m.name, "drift": drift})


def manifold_drift(states: np.ndarray, group: str) -> float:
    det = states[:, 0, 0] * states[:, 1, 1] - states[:, 0, 1] * states[:, 1, 0]
    drift = float(np.abs(det - 1).max()) if len(states) else 0.0
    if group == "su2":
        G = np.einsum("pki,pkj->pij", states.conj(), states) - np.eye(2)
        drift = max(drift, float(np.abs(G).max()))
    return drift


# -- fiber test functions -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class FiberFunction:
    """``e^{i lam z} sum c_ab h_a(s x) h_b(s y)`` on a single-copy fiber."""

    block: Block
    coeffs: np.ndarray

    @property
    def lam(self) -> float:
        return self.block.meta["lam"]

    def __call__(self, x, y, z=0.0):
        from .kernels import fiber_values
        return fiber_values(self.block, self.coeffs, x, y, z)


def gaussian_coefficients(b: Block) -> np.ndarray:
    """Coefficients of ``e^{-|lam| r^2 / 4}``."""
    e0 = np.zeros(b.dim, complex)
    e0[0] = math.sqrt(math.pi)
    return e0


def landau2_coefficients(b: Block) -> np.ndarray:
    """Coefficients of ``(x + i y)^2 e^{-|lam| r^2 / 4}``."""
    N, s = b.meta["N"], b.meta["scale"]
    Q, _ = position_derivative(N, s)
    M = _kron_at(Q, 0, 2, N) + 1j * _kron_at(Q, 1, 2, N)
    return M @ (M @ gaussian_coefficients(b))


@dataclass(frozen=True)
class SeparableG:
    """``g(x, y, z) = e^{-|lam| r^2 / 4} e^{-z^2 / (2 tau^2)}``."""

    lam: float
    tau: float = 1.0

    def __call__(self, x, y, z):
        return np.exp(-abs(self.lam) * (x * x + y * y) / 4 - z * z / (2 * self.tau ** 2))

    def z_transform(self, xi: float) -> float:
        """``int e^{-z^2/(2 tau^2)} e^{-i xi z} dz``."""
        return math.sqrt(2 * math.pi) * self.tau * math.exp(-0.5 * (self.tau * xi) ** 2)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Points drawn from the density proportional to ``g``."""
        sxy = math.sqrt(2 / abs(self.lam))
        return np.column_stack([sxy * rng.standard_normal(n), sxy * rng.standard_normal(n),
                                self.tau * rng.standard_normal(n)])


@dataclass
class MTConfig:
    A: np.ndarray | Callable[[float], np.ndarray]
    f: FiberFunction
    g: SeparableG
    T: float
    R: float = 6.0
    Rz: float = 6.0
    paths: int = 200_000
    h: float | None = None
    seed: int = 0
    name: str = ""
    stream: int = 0

    def A_at(self, t: float) -> np.ndarray:
        A = self.A(t) if callable(self.A) else self.A
        A = np.asarray(A, complex)
        if A.shape != (2, 2) or not np.all(np.isfinite(A)):
            raise ValueError("A must be a finite 2x2 matrix")
        return A

    @property
    def step(self) -> float:
        return self.h if self.h is not None else self.T / 100

    @property
    def volume(self) -> float:
        return (2 * self.R) ** 2 * 2 * self.Rz


@dataclass(frozen=True)
class Estimate:
    value: complex
    se: float
    paths: int
    leakage: float = 0.0

    def to_dict(self) -> dict:
        return {"re": self.value.real, "im": self.value.imag, "se": self.se,
                "paths": self.paths, "leakage": self.leakage}


def _gradient_tables(cfg: MTConfig, times: np.ndarray, keep: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient tables ``K_a = sum_b A_ab C_b`` with ``C_b`` of ``grad_b P_{T-t} f``."""
    b = cfg.f.block
    N = b.meta["N"]
    K1 = np.empty((len(times), keep, keep), complex)
    K2 = np.empty_like(K1)
    lost = 0.0
    for i, t in enumerate(times):
        u = heat(b, cfg.T - t) @ cfg.f.coeffs
        C = [(b.X @ u).reshape(N, N), (b.Y @ u).reshape(N, N)]
        A = cfg.A_at(t)
        for a, out in ((0, K1), (1, K2)):
            full = A[a, 0] * C[0] + A[a, 1] * C[1]
            out[i] = full[:keep, :keep]
            lost = max(lost, np.abs(full).max() - np.abs(full[:keep, :keep]).max(initial=0.0))
    if lost > 1e-12:
        raise ValueError("gradient tables do not fit in the kept Hermite range")
    return K1, K2


def _kept_degree(cfg: MTConfig) -> int:
    N = cfg.f.block.meta["N"]
    C = cfg.f.coeffs.reshape(N, N)
    nz = np.argwhere(np.abs(C) > 1e-14)
    deg = int(nz.sum(axis=1).max()) if nz.size else 0
    return min(N, deg + 2)


def leakage(cfg: MTConfig, paths: int = 20_000) -> float:
    """Fraction of the heat mass of ``|g|`` that ends outside the starting box."""
    rng = _rng(cfg.seed, cfg.stream, 1_000_003)
    start = cfg.g.sample(rng, paths)
    bundle = simulate_hbm_heisenberg(cfg.T, cfg.step, paths, cfg.seed + 7919, GENERATOR_SCALE)
    x0, y0, z0 = start.T
    x1, y1, z1 = bundle.states.T
    end = np.column_stack([x0 + x1, y0 + y1, z0 + z1 + 0.5 * (x0 * y1 - y0 * x1)])
    out = (np.abs(end[:, 0]) > cfg.R) | (np.abs(end[:, 1]) > cfg.R) | (np.abs(end[:, 2]) > cfg.Rz)
    return float(out.mean())


def martingale_pairing_estimate(cfg: MTConfig, backend: str | None = None,
                                check_leakage: bool = True) -> Estimate:
    """Monte Carlo value of ``E[g(Y_T) int_0^T A grad P_{T-t} f(Y_t) . dB_t]``.

    ``Y_0`` is uniform on the box ``[-R, R]^2 x [-Rz, Rz]`` and each path is
    weighted by the box volume in place of Lebesgue (Haar) measure.
    """
    steps = _steps(cfg.T, cfg.step)
    h = cfg.step
    leak = leakage(cfg) if check_leakage else 0.0
    if leak > LEAKAGE_TOL:
        raise BoxTooSmall(f"{leak:.2%} of the heat mass of g leaves the box; enlarge R")
    if not np.any(cfg.A_at(0.0)) and not callable(cfg.A):
        return Estimate(0j, 0.0, cfg.paths, leak)
    keep = _kept_degree(cfg)
    times = h * np.arange(steps)
    K1, K2 = _gradient_tables(cfg, times, keep)
    impl = pathcore.get_backend(backend)
    lam, s = cfg.f.lam, cfg.f.block.meta["scale"]
    sums = []
    sq = []
    for k, n in _batches(cfg.paths):
        rng = _rng(cfg.seed, cfg.stream, k)
        x = rng.uniform(-cfg.R, cfg.R, n)
        y = rng.uniform(-cfg.R, cfg.R, n)
        z = rng.uniform(-cfg.Rz, cfg.Rz, n)
        dB1, dB2, dA = heisenberg_noise(rng, n, steps, h, GENERATOR_SCALE)
        I = impl.martingale_paths(x, y, z, dB1, dB2, dA, K1, K2, lam, s)
        vals = cfg.volume * cfg.g(x, y, z) * I
        sums.append(vals.sum())
        sq.append(np.sum(np.abs(vals) ** 2))
    total = complex(np.sum(sums))
    mean = total / cfg.paths
    var = max(float(np.sum(sq)) / cfg.paths - abs(mean) ** 2, 0.0)
    return Estimate(mean, math.sqrt(var / cfg.paths), cfg.paths, leak)


def duality_reference(cfg: MTConfig, n: int = 24, rtol: float = 1e-3) -> complex:
    """``2 int_0^T int A grad P_t f . grad P_t g dmu dt`` through fiber matrices.

    Only the ``-lam`` z-frequency of g pairs with f, giving the factor
    ``ghat(-lam)``; the (x, y) integral is the coefficient dot product
    divided by ``s^2``. Gauss-Legendre in t is checked against ``2 n`` nodes.
    """
    b = cfg.f.block
    lam = cfg.f.lam
    bg = heisenberg_fiber(-lam, 1, b.meta["N"], b.meta["pad"])
    cg = gaussian_coefficients(bg)
    fac = cfg.g.z_transform(-lam) / b.meta["scale"] ** 2

    def integrand(t):
        u = heat(b, t) @ cfg.f.coeffs
        v = heat(bg, t) @ cg
        gf = (b.X @ u, b.Y @ u)
        gg = (bg.X @ v, bg.Y @ v)
        # the pairing runs at time T - t along the path; P_s with s = T - t
        A = cfg.A_at(cfg.T - t)
        return sum(A[a, c] * (gf[c] @ gg[a]) for a in range(2) for c in range(2))

    def quad(m):
        x, w = np.polynomial.legendre.leggauss(m)
        t = 0.5 * cfg.T * (x + 1)
        return 0.5 * cfg.T * sum(wi * integrand(ti) for wi, ti in zip(w, t))

    v1, v2 = quad(n), quad(2 * n)
    if abs(v1 - v2) > rtol * max(abs(v2), 1e-300):
        raise RuntimeError(f"reference quadrature not converged: {abs(v1 - v2):.3e}")
    return complex(2 * fac * v2)


ROTATION = np.array([[0.0, 1.0], [-1.0, 0.0]])


def regression_configs(paths: int = 200_000, seed: int = 0, lam: float = 1.0) -> list[MTConfig]:
    """The four fixed configurations: A in {A_11, rotation}, T in {0.5, 1}."""
    b = heisenberg_fiber(lam, 1, 8, 2)
    f_l2 = FiberFunction(b, landau2_coefficients(b))
    f_g = FiberFunction(b, gaussian_coefficients(b))
    g = SeparableG(lam)
    out = []
    for T in (0.5, 1.0):
        # the box grows with the diffusion spread so that leakage stays well under 1%
        box = {"R": 5 + 2 * T, "Rz": 6 + 2 * T, "paths": paths, "seed": seed}
        out.append(MTConfig(martingale_matrix(1, 0, 0), f_l2, g, T, name=f"A11,T={T:g}",
                            stream=len(out), **box))
        out.append(MTConfig(ROTATION, f_g, g, T, name=f"rotation,T={T:g}", stream=len(out), **box))
    return out


def agreement(est: Estimate, ref: complex) -> tuple[bool, float]:
    """Pass when ``|est - ref| <= max(3 SE, 5% |ref|)``; also returns the gap."""
    gap = abs(est.value - ref)
    return bool(gap <= max(3 * est.se, 0.05 * abs(ref))), gap
