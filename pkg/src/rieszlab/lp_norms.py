"""Quadrature grids, basis evaluation and lower bounds for L^p operator norms.

SU(2) functions are sampled on a tensor grid in the cylindric chart with
Haar weights ``sin r`` normalized to total mass one. An operator acting on a
block is extended to a span of matrix coefficients ``g -> pi_j(g)[a, k]``:
left-invariant fields act on the column index ``k``, so each row ``a`` carries
a copy of the block.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .blocks import Block, heisenberg_fiber, hermite_functions, su2_block
from .lie_models import CHART_EPS, SU2
from .operators import OperatorSpec, bound_value, build_S_abc

SCHUR_TOL = 1e-6
BOYD_RESTARTS = 12
BOYD_ITERS = 200
BOYD_STOP = 1e-9
NEWTON_MAX = 60


class GridValidationError(ValueError):
    """The grid does not integrate matrix-coefficient products exactly enough."""


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    group: str
    r: np.ndarray
    theta: np.ndarray
    z: np.ndarray
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.weights.size

    def integrate(self, values) -> complex:
        return complex(np.sum(self.weights * np.asarray(values)))


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.size,):
            raise ValueError("values do not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite samples")


@dataclass
class NormReport:
    group: str
    spec: dict
    estimate: float
    theorem_bound: float
    per_piece_bound: float
    cot_bound: float
    tight_bound: float
    iterations: int
    converged: bool
    restarts: int
    span: str

    @property
    def margin(self) -> float:
        return self.theorem_bound - self.estimate

    @property
    def passed(self) -> bool:
        return self.estimate <= self.theorem_bound + 1e-6

    def to_dict(self) -> dict:
        d = asdict(self)
        d["margin"] = self.margin
        d["passed"] = self.passed
        return d


# -- grids --------------------------------------------------------------------

def su2_grid(n_r: int = 16, n_theta: int = 16, n_z: int = 16, validate_j: float | None = None) -> QuadratureGrid:
    """Tensor grid on the SU(2) chart: Gauss-Legendre in r, trapezoid in theta and z.

    With ``validate_j`` the grid is checked for Schur orthogonality on all
    blocks ``j <= validate_j``; trapezoids need ``n_theta, n_z > 4 j``.
    """
    if min(n_r, n_theta, n_z) < 8:
        raise ValueError("grid resolutions must be at least 8")
    x, wr = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * np.pi * (x + 1)
    wr = 0.5 * np.pi * wr * np.sin(r)
    if r.min() <= CHART_EPS or r.max() >= np.pi - CHART_EPS:
        raise ValueError("radial nodes too close to the chart singularities")
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    lo, hi = SU2.z_range
    z = lo + (hi - lo) * np.arange(n_z) / n_z
    R, T, Zg = np.meshgrid(r, th, z, indexing="ij")
    W = np.broadcast_to(wr[:, None, None], R.shape).ravel()
    grid = QuadratureGrid("su2", R.ravel(), T.ravel(), Zg.ravel(), W / W.sum(),
                          {"n_r": n_r, "n_theta": n_theta, "n_z": n_z})
    if validate_j is not None:
        err = schur_error(grid, validate_j)
        if err > SCHUR_TOL:
            raise GridValidationError(f"Schur orthogonality error {err:.2e} exceeds {SCHUR_TOL:g}")
        grid.meta["schur_error"] = err
    return grid


def heisenberg_box_grid(half_width: float = 6.0, n: int = 48, n_z: int = 8) -> QuadratureGrid:
    """Gauss-Legendre box grid ``[-a, a]^2 x [0, 2 pi)`` in cartesian coordinates.

    The theta slot holds y, and r holds x; the weights are Lebesgue.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    x, w = half_width * x, half_width * w
    z = 2 * np.pi * np.arange(n_z) / n_z
    Xg, Yg, Zg = np.meshgrid(x, x, z, indexing="ij")
    W = (w[:, None, None] * w[None, :, None] * np.full(n_z, 2 * np.pi / n_z)).ravel()
    return QuadratureGrid("heisenberg", Xg.ravel(), Yg.ravel(), Zg.ravel(), W,
                          {"half_width": half_width, "n": n, "n_z": n_z})


# -- basis evaluation ---------------------------------------------------------

def su2_coefficients(b: Block, r, theta, z) -> np.ndarray:
    """``pi_j(g)`` at chart points, shape ``(points, d, d)``.

    Uses ``exp(r (cos t X + sin t Y)) = e^{tZ} e^{rX} e^{-tZ}`` and the
    diagonal ``e^{zZ}``, so only ``X`` is diagonalized.
    """
    if b.group != "su2":
        raise ValueError("matrix coefficients need an su2 block")
    m = np.asarray(b.meta["weights"])
    mu, V = np.linalg.eigh(-1j * b.X)
    r = np.asarray(r, float)
    E = np.einsum("ik,pk,jk->pij", V, np.exp(1j * np.outer(r, mu)), V.conj())
    left = np.exp(1j * np.outer(theta, m))
    right = np.exp(1j * np.outer(np.asarray(z) - np.asarray(theta), m))
    return left[:, :, None] * E * right[:, None, :]


def evaluate_block_basis(b: Block, grid: QuadratureGrid, row: int | None = None) -> np.ndarray:
    """Sampled basis functions, one column per basis element of ``b``.

    su2: the matrix coefficients ``pi_j(g)[row, k]``; with ``row=None`` all
    rows, ordered ``(row, k)`` with k fastest. Heisenberg (single copy):
    ``e^{i lam z} h_a(s x) h_b(s y)``.
    """
    if b.group == "su2":
        P = su2_coefficients(b, grid.r, grid.theta, grid.z)
        if row is not None:
            return P[:, row, :]
        return P.reshape(grid.size, -1)
    if b.group == "heisenberg":
        if b.copies != 1 or grid.group != "heisenberg":
            raise ValueError("box evaluation needs a single-copy fiber and a Heisenberg grid")
        N, s, lam = b.meta["N"], b.meta["scale"], b.meta["lam"]
        hx = hermite_functions(N, s * grid.r)
        hy = hermite_functions(N, s * grid.theta)
        vals = (hx[:, None, :] * hy[None, :, :]).reshape(N * N, -1).T
        return vals * np.exp(1j * lam * grid.z)[:, None]
    raise ValueError(f"no function model for {b.group} blocks")


def schur_error(grid: QuadratureGrid, jmax: float) -> float:
    """Max deviation of ``int pi_ab conj(pi_cd)`` from ``delta delta / (2j+1)``."""
    blocks = [su2_block(k / 2) for k in range(int(round(2 * jmax)) + 1)]
    Phi = np.concatenate([evaluate_block_basis(b, grid) for b in blocks], axis=1)
    G = (Phi.conj() * grid.weights[:, None]).T @ Phi
    target = np.concatenate([np.full(b.dim ** 2, 1.0 / b.dim) for b in blocks])
    err = np.abs(G - np.diag(target)).max()
    return float(err)


def lp_norm(f, p: float, weights=None) -> float:
    """``(sum w |f|^p)^{1/p}``; ``f`` is a :class:`GridFunction` or raw samples."""
    if not 1 <= p < math.inf:
        raise ValueError("p must lie in [1, inf)")
    if isinstance(f, GridFunction):
        vals, weights = f.values, f.grid.weights
    else:
        vals = np.asarray(f)
    return float(np.sum(weights * np.abs(vals) ** p) ** (1 / p))


# -- p-norm maximization -------------------------------------------------------

@dataclass
class BoydResult:
    value: float
    coefficients: np.ndarray
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def _realify(Phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    A, B = Phi.real, Phi.imag
    return np.hstack([A, -B]), np.hstack([B, A])


def _dual_solve(Pre, Pim, w, p, zr, x0, tol=1e-11) -> np.ndarray:
    """Minimize ``(1/p) sum w |u|^p - z . x`` with ``u = (Pre x) + i (Pim x)``.

    Damped Newton in real coordinates; the objective is strictly convex
    whenever the sampled span has full rank.
    """
    x = x0.copy()

    def objective(x):
        ur, ui = Pre @ x, Pim @ x
        return np.sum(w * np.hypot(ur, ui) ** p) / p - zr @ x

    fx = objective(x)
    scale = np.linalg.norm(zr)
    for _ in range(NEWTON_MAX):
        ur, ui = Pre @ x, Pim @ x
        a = np.maximum(np.hypot(ur, ui), 1e-12)
        g = a ** (p - 2) * w
        grad = Pre.T @ (g * ur) + Pim.T @ (g * ui) - zr
        if np.linalg.norm(grad) <= tol * scale:
            break
        c, s = ur / a, ui / a
        h11 = g * (1 + (p - 2) * c * c)
        h22 = g * (1 + (p - 2) * s * s)
        h12 = g * (p - 2) * c * s
        H = (Pre.T * h11) @ Pre + (Pim.T * h22) @ Pim + (Pre.T * h12) @ Pim + (Pim.T * h12) @ Pre
        step = np.linalg.solve(H + 1e-14 * np.trace(H) * np.eye(H.shape[0]), grad)
        decrement = grad @ step
        if decrement <= 1e-13 * (abs(fx) + 1e-300):
            break
        t = 1.0
        while t > 1e-10:
            xn = x - t * step
            fn = objective(xn)
            if fn <= fx - 1e-4 * t * (grad @ step):
                break
            t *= 0.5
        else:
            break
        x, fx = xn, fn
    return x


def boyd_norm_lower_bound(M: np.ndarray, Phi: np.ndarray, weights: np.ndarray, p: float,
                          restarts: int = BOYD_RESTARTS, iters: int = BOYD_ITERS,
                          stop: float = BOYD_STOP, seed: int = 0, key: tuple = ()) -> BoydResult:
    """Lower bound for ``sup ||Phi M c||_p / ||Phi c||_p`` over coefficient vectors c.

    Nonlinear power iteration restricted to the span: ``z = (Phi M)^H J_p(Phi M c)``,
    then ``c`` solves ``Phi^H J_p(Phi c) = z`` and is renormalized, with
    ``J_p(v) = w |v|^{p-2} v``. Every iterate ratio is a genuine ratio of
    computed norms; the best over restarts is returned. Restart streams are
    keyed by ``(seed, *key, restart)``.
    """
    if not 1 < p < math.inf:
        raise ValueError("p must lie in (1, inf)")
    n = Phi.shape[1]
    PM = Phi @ M
    Pre, Pim = _realify(Phi)
    w = np.asarray(weights, float)

    def ratio(c):
        den = lp_norm(Phi @ c, p, w)
        return lp_norm(PM @ c, p, w) / den if den > 0 else 0.0, den

    best = BoydResult(0.0, np.zeros(n, complex), 0, False)
    for k in range(restarts):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key, k])))
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        val, den = ratio(c)
        c = c / den
        hist = [val]
        converged = False
        it = 0
        for it in range(1, iters + 1):
            v = PM @ c
            if not np.any(v):
                break
            z = PM.conj().T @ (w * np.abs(v) ** (p - 2) * v)
            zr = np.concatenate([z.real, z.imag])
            # warm start along the current direction: scalar solve of the dual problem
            s = (zr @ np.concatenate([c.real, c.imag])) ** (1 / (p - 1))
            x = _dual_solve(Pre, Pim, w, p, zr, s * np.concatenate([c.real, c.imag]))
            cn = x[:n] + 1j * x[n:]
            new, den = ratio(cn)
            if den == 0:
                break
            c = cn / den
            hist.append(new)
            if abs(new - val) <= stop * max(abs(val), 1e-300):
                converged = True
                val = max(val, new)
                break
            val = max(val, new)
        if val > best.value:
            best = BoydResult(val, c, it, converged, hist)
    return best


def su2_span(J: float, grid: QuadratureGrid) -> tuple[list[Block], np.ndarray]:
    blocks = [su2_block(k / 2) for k in range(int(round(2 * J)) + 1)]
    Phi = np.concatenate([evaluate_block_basis(b, grid) for b in blocks], axis=1)
    return blocks, Phi


def span_operator(blocks: list[Block], spec: OperatorSpec) -> np.ndarray:
    """Block-diagonal coefficient map: ``kron(I_d, S_j)`` per block."""
    mats = [np.kron(np.eye(b.dim), build_S_abc(b, spec)) for b in blocks]
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), complex)
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i:i + k, i:i + k] = m
        i += k
    return out


def norm_specs() -> list[OperatorSpec]:
    """The twelve-plus sample: four coefficient triples, p in {1.5, 2, 4}, alpha in {0, 1}."""
    out = []
    for abc in ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)):
        for p in (1.5, 2.0, 4.0):
            for alpha in (0.0, 1.0):
                out.append(OperatorSpec(*abc, alpha=alpha, rho=1, p=p))
    return out


def norm_suite(specs=None, J: float = 1.0, grid: QuadratureGrid | None = None, seed: int = 0,
               restarts: int = BOYD_RESTARTS, iters: int = BOYD_ITERS) -> list[NormReport]:
    """Boyd lower estimates on the SU(2) span ``j <= J`` against the bound values."""
    specs = norm_specs() if specs is None else list(specs)
    if grid is None:
        n = max(8, int(4 * J) + 8)
        grid = su2_grid(16, n, n, validate_j=J)
    blocks, Phi = su2_span(J, grid)
    reports = []
    for i, spec in enumerate(specs):
        M = span_operator(blocks, spec)
        res = boyd_norm_lower_bound(M, Phi, grid.weights, spec.p, restarts, iters, seed=seed, key=(i,))
        bv = bound_value(spec)
        reports.append(NormReport(
            "su2", asdict(spec), res.value, bv.theorem_bound, bv.per_piece_bound,
            bv.cot_bound, bv.tight_bound, res.iterations, res.converged, restarts, f"j<={J:g}"))
    return reports


def fiber_norm_span(lam: float = 1.0, N: int = 8, grid: QuadratureGrid | None = None):
    """Sampled Hermite span of a single-copy fiber on a box grid (exploratory)."""
    b = heisenberg_fiber(lam, 1, N, 2)
    grid = heisenberg_box_grid() if grid is None else grid
    return b, evaluate_block_basis(b, grid)
