"""Check suites: each returns a list of :class:`CheckRecord`.

Every record carries an anchor naming the result it exercises. A record
passes when ``value <= bound``; for the few checks that must reach a value
(sharpness witnesses) the value is the distance to the target.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import blocks as blk
from . import kernels as ker
from . import lie_models as lm
from . import lp_norms as lpn
from . import operators as ops
from . import stochastics as sto

SUITES = ("identities", "spectrum", "kernels", "norms", "stochastic")

ANCHORS = {
    "identities": ["structure constants", "coordinate vector fields", "intertwining relations",
                   "two-route resolvent identity", "semigroup shift law", "antisymmetric pair integral",
                   "real and imaginary parts", "martingale matrix norm"],
    "spectrum": ["SU(2) eigenvalue formula", "Landau levels", "heat semigroup"],
    "kernels": ["Green function", "Beurling-Ahlfors kernel", "projection to the plane"],
    "norms": ["norm inequality for S_abc", "sharpness at p = 2"],
    "stochastic": ["martingale duality", "horizontal Brownian motion"],
}

DEFAULT_LAMBDAS = (0.5, -0.5, 1.0, -1.0, 2.0)

SHIFT_NAMES = {
    "plus": "shift W P_t = e^{+2 lam t} P_t W",
    "minus": "shift W P_t = e^{-2 lam t} P_t W",
    "pairing": "shift P_t W W P_t = e^{2 rho t} W P_2t W",
    "WPt": "shift W P_t on weight vectors",
}


@dataclass
class SuiteConfig:
    group: str | None = None
    suite: str = "all"
    tol: float | None = None
    jmax: float = 4.0
    spectrum_jmax: float = 6.0
    dmax: int = 5
    lambdas: tuple = DEFAULT_LAMBDAS
    N: int = 24
    pad: int = 6
    norm_J: float = 1.0
    grid_n_r: int = 16
    restarts: int = lpn.BOYD_RESTARTS
    p: tuple | None = None
    abc: tuple | None = None
    paths: int = 200_000
    seed: int = 0
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.suite not in SUITES + ("all",):
            raise ValueError(f"unknown suite {self.suite!r}")
        if self.group is not None:
            self.group = lm.get_model(self.group).name
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.paths < 1 or self.jmax < 0 or self.dmax < 2:
            raise ValueError("paths, jmax and dmax out of range")
        self.lambdas = tuple(float(v) for v in self.lambdas)

    def wants(self, group: str) -> bool:
        return self.group is None or self.group == group

    def to_dict(self) -> dict:
        # where the report goes does not affect its content
        d = asdict(self)
        d.pop("out")
        return d


@dataclass
class CheckRecord:
    suite: str
    name: str
    group: str
    anchor: str
    value: float
    bound: float
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.bound)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _tol(cfg: SuiteConfig, default: float) -> float:
    return cfg.tol if cfg.tol is not None else default


def _su2_js(jmax: float) -> list:
    return [k / 2 for k in range(1, int(round(2 * jmax)) + 1)]


# -- identities ---------------------------------------------------------------

def _field_test_function(r, theta, z):
    return np.cos(r) * np.sin(theta + 0.3) + 0.2 * r * r * np.cos(z) + 0.1 * r * np.sin(2 * theta - z)


FIELD_POINTS = {
    "heisenberg": [(0.7, 0.4, -0.3), (1.3, 2.2, 0.9)],
    "su2": [(0.9, 0.5, -1.0), (2.0, 4.0, 2.5)],
    "sl2": [(0.8, 1.1, 0.4), (1.5, 5.0, -2.0)],
}


def heisenberg_blocks(cfg: SuiteConfig) -> list:
    out = []
    for lam in cfg.lambdas:
        out.append(blk.heisenberg_fiber(lam, 1, cfg.N, cfg.pad))
        out.append(blk.heisenberg_fiber(lam, 2, 6, 3))
    return out


def identity_checks(cfg: SuiteConfig) -> list[CheckRecord]:
    recs = []
    for g in lm.GROUP_NAMES:
        if not cfg.wants(g):
            continue
        m = lm.get_model(g)
        recs.append(CheckRecord("identities", "structure constants", g, "structure constants",
                                lm.commutator_residual(m), _tol(cfg, 1e-13)))
        fd = max(lm.field_bracket_residual(m, _field_test_function, p) for p in FIELD_POINTS[g])
        recs.append(CheckRecord("identities", "field brackets (finite differences)", g,
                                "coordinate vector fields", fd, 1e-4))
    groups = []
    if cfg.wants("su2"):
        groups += [(blk.su2_block(j), (0.0, 0.5, 1.0)) for j in _su2_js(cfg.jmax)]
    if cfg.wants("sl2"):
        groups += [(blk.sl2_block(d), (0.0, 1.0)) for d in range(2, cfg.dmax + 1)]
    if cfg.wants("heisenberg"):
        groups += [(b, (0.0,)) for b in heisenberg_blocks(cfg)]
    for b, alphas in groups:
        for key, res in ops.intertwining_residuals(b).items():
            recs.append(CheckRecord("identities", f"intertwining {key}", b.group,
                                    "intertwining relations", res, _tol(cfg, 1e-10), {"block": b.label}))
        for alpha in alphas:
            for j in range(b.copies):
                for k in range(b.copies):
                    notes = {"block": b.label, "alpha": alpha, "j": j, "k": k}
                    try:
                        rep = ops.two_route_residual(b, alpha, j, k)
                        value = rep.residual
                        notes["kernel_dim"] = rep.notes["kernel_dim"]
                    except ValueError as exc:
                        value = math.inf
                        notes["error"] = str(exc)
                    recs.append(CheckRecord("identities", "two-route", b.group,
                                            "two-route resolvent identity", value, _tol(cfg, 1e-8), notes))
        for t in (0.1, 0.5, 1.0):
            for key, res in ops.shift_identity_residual(b, t).items():
                recs.append(CheckRecord("identities", SHIFT_NAMES[key], b.group, "semigroup shift law",
                                        res, _tol(cfg, 1e-9), {"block": b.label, "t": t}))
    if cfg.wants("su2"):
        A = np.array([[0.0, 1.0], [-1.0, 0.0]])
        for j in _su2_js(min(cfg.jmax, 3)):
            b = blk.su2_block(j)
            R0, _, _ = blk.spectral_pinv(b, 0.5)
            res = ops.restricted_norm(2 * ops.S_A_operator(b, A, 0.5) - b.Z @ R0, b)
            recs.append(CheckRecord("identities", "2 S_A = Z pinv(-L + alpha)", "su2",
                                    "antisymmetric pair integral", res, _tol(cfg, 1e-9),
                                    {"block": b.label, "alpha": 0.5}))
            recs.append(CheckRecord("identities", "real/imaginary split", "su2",
                                    "real and imaginary parts", ops.real_imag_residual(b, 0.5),
                                    _tol(cfg, 1e-10), {"block": b.label}))
    if cfg.wants("heisenberg"):
        val = abs(ops.matrix_norm(ops.martingale_matrix(1, 0, 0)) - math.sqrt(2))
        recs.append(CheckRecord("identities", "|A_11| - sqrt(2)", "heisenberg",
                                "martingale matrix norm", val, 1e-12))
    return recs


# -- spectrum -----------------------------------------------------------------

def su2_spectrum_error(jmax: float) -> float:
    err = 0.0
    for j in [k / 2 for k in range(int(round(2 * jmax)) + 1)]:
        b = blk.su2_block(j)
        ev = np.sort(np.linalg.eigvalsh(-0.5 * (b.L + b.L.conj().T)))
        target = np.sort([blk.eig_index_value(*blk.su2_index_map(j, m)) for m in b.meta["weights"]])
        err = max(err, float(np.abs(ev - target).max()))
    return err


def landau_error(lam: float, N: int = 24, pad: int = 6) -> float:
    """Eigenvalues of ``-L`` on the exact degree range against ``|lam| (2k + 1)``."""
    b = blk.heisenberg_fiber(lam, 1, N, pad)
    cols = b.cols()
    sub = -b.L[np.ix_(cols, cols)]
    ev = np.sort(np.linalg.eigvalsh(0.5 * (sub + sub.conj().T)))
    # the degree-d polynomials times the Gaussian carry levels k = 0..d once each
    D = N - 1 - pad
    target = np.sort([abs(lam) * (2 * k + 1) for d in range(D + 1) for k in range(d + 1)])
    return float(np.abs(ev - target).max())


def spectrum_checks(cfg: SuiteConfig) -> list[CheckRecord]:
    recs = []
    if cfg.wants("su2"):
        recs.append(CheckRecord("spectrum", "eigenvalues of -L vs lambda_nk", "su2",
                                "SU(2) eigenvalue formula", su2_spectrum_error(cfg.spectrum_jmax),
                                _tol(cfg, 1e-10), {"jmax": cfg.spectrum_jmax}))
        res = 0.0
        for j in _su2_js(4):
            b = blk.su2_block(j)
            for s, t in ((0.3, 1.1), (2.0, 2.0)):
                res = max(res, float(np.linalg.norm(blk.heat(b, s) @ blk.heat(b, t) - blk.heat(b, s + t), 2)))
        recs.append(CheckRecord("spectrum", "heat semigroup law", "su2", "heat semigroup", res, _tol(cfg, 1e-11)))
    if cfg.wants("heisenberg"):
        for lam in cfg.lambdas:
            recs.append(CheckRecord("spectrum", "Landau levels", "heisenberg", "Landau levels",
                                    landau_error(lam, cfg.N, cfg.pad), _tol(cfg, 1e-10), {"lam": lam}))
    return recs


# -- kernels ------------------------------------------------------------------

def kernel_points(n: int = 30, seed: int = 0) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 6])))
    pts = []
    while len(pts) < n:
        p = rng.uniform(-1.5, 1.5, 3)
        if ker.koranyi_norm(*p) > 0.5:
            pts.append(p)
    return np.array(pts)


def kernel_checks(cfg: SuiteConfig) -> list[CheckRecord]:
    if not cfg.wants("heisenberg"):
        return []
    recs = [
        CheckRecord("kernels", "G(1,0,0) = 1/(4 pi)", "heisenberg", "Green function",
                    abs(float(ker.green(1, 0, 0)) - 1 / (4 * math.pi)), 0.0),
        CheckRecord("kernels", "K(1,0,0) = 1/pi", "heisenberg", "Beurling-Ahlfors kernel",
                    abs(complex(ker.ba_kernel(1, 0, 0)) - 1 / math.pi), 0.0),
    ]
    pts = kernel_points(30, cfg.seed)
    recs.append(CheckRecord("kernels", "W What G = K (finite differences)", "heisenberg",
                            "Beurling-Ahlfors kernel", float(ker.kernel_fd_residuals(pts).max()), 1e-4,
                            {"points": len(pts)}))
    harm = max(ker.harmonicity_residual(p) for p in list(pts) + [(1, 0, 0), (0, 0, 1)])
    recs.append(CheckRecord("kernels", "L G = 0 off the origin", "heisenberg", "Green function", harm, 1e-4))
    hb = ker.apply_BA_pv(ker.gaussian_test_function)
    cl = ker.classical_BA_at_origin(lambda x, y: ker.gaussian_test_function(x, y))
    recs.append(CheckRecord("kernels", "Heisenberg p.v. on the Gaussian test", "heisenberg",
                            "projection to the plane", abs(hb.value + 1), 1e-3, {"value": hb.value.real}))
    recs.append(CheckRecord("kernels", "planar p.v. on the Gaussian test", "heisenberg",
                            "projection to the plane", abs(cl.value + 1), 1e-3, {"value": cl.value.real}))
    recs.append(CheckRecord("kernels", "Heisenberg vs planar p.v.", "heisenberg",
                            "projection to the plane", abs(hb.value - cl.value), 1e-3))
    for lam in (1.0, -1.0):
        b = blk.heisenberg_fiber(lam, 1, cfg.N, cfg.pad)
        spec = ker.fiber_ba_at_origin(b)
        pv = ker.apply_BA_pv(ker.fiber_test_function(lam)).value
        recs.append(CheckRecord("kernels", "p.v. vs fiber resolvent", "heisenberg", "Beurling-Ahlfors kernel",
                                abs(pv - spec) / abs(spec), 0.01, {"lam": lam, "spectral": spec.real}))
    return recs


# -- norms --------------------------------------------------------------------

def norm_checks(cfg: SuiteConfig) -> list[CheckRecord]:
    if not cfg.wants("su2"):
        return []
    specs = lpn.norm_specs()
    if cfg.p is not None or cfg.abc is not None:
        ps = cfg.p or (1.5, 2.0, 4.0)
        abcs = [cfg.abc] if cfg.abc is not None else [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)]
        specs = [ops.OperatorSpec(*abc, alpha=al, rho=1, p=p) for abc in abcs for p in ps for al in (0.0, 1.0)]
    n = max(8, int(4 * cfg.norm_J) + 8)
    grid = lpn.su2_grid(cfg.grid_n_r, n, n, validate_j=cfg.norm_J)
    reports = lpn.norm_suite(specs, cfg.norm_J, grid, cfg.seed, cfg.restarts)
    recs = []
    for rep in reports:
        s = rep.spec
        name = f"S(a={s['a']:g},b={s['b']:g},c={s['c']:g}) alpha={s['alpha']:g} p={s['p']:g}"
        recs.append(CheckRecord("norms", name, "su2", "norm inequality for S_abc", rep.estimate,
                                rep.theorem_bound + 1e-6, rep.to_dict()))
        if (s["a"], s["b"], s["c"], s["alpha"], s["p"]) == (1, 0, 0, 0.0, 2.0):
            recs.append(CheckRecord("norms", "sharpness witness |estimate - cot(pi/4)|", "su2",
                                    "sharpness at p = 2", abs(rep.estimate - rep.cot_bound), 1e-9,
                                    {"estimate": rep.estimate}))
    return recs


# -- stochastic ---------------------------------------------------------------

def stochastic_checks(cfg: SuiteConfig) -> list[CheckRecord]:
    recs = []
    if cfg.wants("heisenberg"):
        for mt in sto.regression_configs(cfg.paths, cfg.seed):
            ref = sto.duality_reference(mt)
            est = sto.martingale_pairing_estimate(mt)
            ok, gap = sto.agreement(est, ref)
            allowed = max(3 * est.se, 0.05 * abs(ref))
            recs.append(CheckRecord("stochastic", f"pairing {mt.name}", "heisenberg", "martingale duality",
                                    gap, allowed, {"estimate": est.to_dict(),
                                                   "reference": [ref.real, ref.imag]}))
        T = 1.0
        b = sto.simulate_hbm_heisenberg(T, T / 100, cfg.paths, cfg.seed)
        z = b.states[:, 2]
        zc = (z - z.mean()) ** 2
        se = float(np.sqrt(zc.var() / len(z)))
        recs.append(CheckRecord("stochastic", "Var(z_T) = T^2/4", "heisenberg", "horizontal Brownian motion",
                                abs(float(zc.mean()) - T * T / 4), 3 * se, {"var": float(zc.mean())}))
        b = sto.simulate_hbm_heisenberg(T, T / 100, cfg.paths, cfg.seed, scale=sto.GENERATOR_SCALE)
        x2 = b.states[:, 0] ** 2
        recs.append(CheckRecord("stochastic", "E[x_T^2] = 2T at generator scale 2", "heisenberg",
                                "horizontal Brownian motion", abs(float(x2.mean()) - 2 * T),
                                3 * float(x2.std() / math.sqrt(len(x2))), {"mean": float(x2.mean())}))
    if cfg.wants("su2"):
        # the spin-1/2 character decays as e^{-T/2} under the generator L
        T, paths = 1.0, min(cfg.paths, 20_000)
        b = sto.simulate_hbm_group("su2", T, T / 100, paths, cfg.seed)
        tr = np.trace(b.states, axis1=1, axis2=2).real
        se = float(tr.std() / math.sqrt(paths))
        recs.append(CheckRecord("stochastic", "E[trace Y_T] = 2 exp(-T/2)", "su2", "horizontal Brownian motion",
                                abs(float(tr.mean()) - 2 * math.exp(-T / 2)), 3 * se + 5e-3,  # Euler bias is O(h)
                                {"drift": b.meta["drift"], "mean": float(tr.mean())}))
    return recs


RUNNERS = {
    "identities": identity_checks,
    "spectrum": spectrum_checks,
    "kernels": kernel_checks,
    "norms": norm_checks,
    "stochastic": stochastic_checks,
}


def run_checks(cfg: SuiteConfig) -> list[CheckRecord]:
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    out = []
    for name in names:
        out.extend(RUNNERS[name](cfg))
    return out
