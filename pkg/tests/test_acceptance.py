"""Acceptance criteria 1-10, each at its stated tolerance and runtime budget.

Run under pytest (one summary line per criterion is printed at the end) or
directly with ``python tests/test_acceptance.py``.
"""

import json
import math
import os
import subprocess
import sys
import tempfile
import time

import numpy as np
import pytest

from rieszlab import blocks as blk
from rieszlab import kernels as ker
from rieszlab import lie_models as lm
from rieszlab import lp_norms as lpn
from rieszlab import operators as ops
from rieszlab import stochastics as sto
from rieszlab import suites

LAMBDAS = (0.5, -0.5, 1.0, -1.0, 2.0)
RESULTS = {}


def heisenberg_blocks():
    out = []
    for lam in LAMBDAS:
        out.append(blk.heisenberg_fiber(lam, 1, 24, 6))
        out.append(blk.heisenberg_fiber(lam, 2, 6, 3))
    return out


def su2_blocks(jmax=4):
    return [blk.su2_block(k / 2) for k in range(1, int(2 * jmax) + 1)]


def sl2_blocks(dmax=5):
    return [blk.sl2_block(d) for d in range(2, dmax + 1)]


def timed(budget):
    def wrap(fn):
        def run():
            t = time.perf_counter()
            ok, detail = fn()
            dt = time.perf_counter() - t
            in_time = dt < budget
            detail = f"{detail}; {dt:.1f} s (budget {budget:g} s)"
            return ok and in_time, detail
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


@timed(1.0)
def criterion_1():
    """Structure constants: matrices <= 1e-13, coordinate fields (FD) <= 1e-4."""
    mat = max(lm.commutator_residual(lm.get_model(g)) for g in lm.GROUP_NAMES)
    fd = max(lm.field_bracket_residual(g, suites._field_test_function, p)
             for g in lm.GROUP_NAMES for p in suites.FIELD_POINTS[g])
    return mat <= 1e-13 and fd <= 1e-4, f"matrix {mat:.1e}, FD {fd:.1e}"


@timed(1.0)
def criterion_2():
    """SU(2) spectrum j <= 6 against lambda_{n,k}, <= 1e-10."""
    err = suites.su2_spectrum_error(6)
    return err <= 1e-10, f"max error {err:.1e}"


@timed(5.0)
def criterion_3():
    """Intertwining identities on all test blocks, <= 1e-10."""
    worst = 0.0
    for b in su2_blocks() + sl2_blocks() + heisenberg_blocks():
        worst = max(worst, *ops.intertwining_residuals(b).values())
    return worst <= 1e-10, f"max residual {worst:.1e}"


@timed(30.0)
def criterion_4():
    """Two routes agree to 1e-8 on su2, sl2 and padded Heisenberg fibers."""
    cases = [(b, a) for b in su2_blocks() for a in (0.0, 0.5, 1.0)]
    cases += [(b, a) for b in sl2_blocks() for a in (0.0, 1.0)]
    cases += [(b, 0.0) for b in heisenberg_blocks()]
    worst, failed = 0.0, []
    for b, alpha in cases:
        for j in range(b.copies):
            for k in range(b.copies):
                try:
                    res = ops.two_route_residual(b, alpha, j, k).residual
                except ValueError:
                    res = math.inf
                if not res <= 1e-8:
                    failed.append(f"{b.label}@{alpha:g}")
                else:
                    worst = max(worst, res)
    detail = f"max passing residual {worst:.1e}; failing: {sorted(set(failed)) or 'none'}"
    return not failed, detail


@timed(5.0)
def criterion_5():
    """Shift identities: su2 pairing with e^{2t}; Heisenberg W e^{tL} = e^{2 lam t} e^{tL} W."""
    su2 = max(ops.shift_identity_residual(b, t)["pairing"] for b in su2_blocks() for t in (0.1, 0.5, 1.0))
    plus, minus = 0.0, 0.0
    for b in heisenberg_blocks():
        for t in (0.1, 0.5, 1.0):
            r = ops.shift_identity_residual(b, t)
            plus, minus = max(plus, r["plus"]), max(minus, r["minus"])
    detail = f"su2 {su2:.1e}; Heisenberg e^(+2 lam t) {plus:.2g}; (e^(-2 lam t) would give {minus:.1e})"
    return su2 <= 1e-9 and plus <= 1e-9, detail


@timed(60.0)
def criterion_6():
    """Kernel constants, FD kernel check, harmonicity, projection to the plane."""
    exact = ker.green(1, 0, 0) == 1 / (4 * math.pi) and ker.ba_kernel(1, 0, 0) == 1 / math.pi
    pts = suites.kernel_points(30)
    fd = float(ker.kernel_fd_residuals(pts).max())
    harm = max(ker.harmonicity_residual(p) for p in pts)
    hb = ker.apply_BA_pv(ker.gaussian_test_function).value
    cl = ker.classical_BA_at_origin(lambda x, y: ker.gaussian_test_function(x, y)).value
    proj = abs(hb - cl)
    ok = exact and fd <= 1e-4 and harm <= 1e-4 and proj <= 1e-3 and abs(hb + 1) <= 1e-3
    return ok, f"exact {exact}, FD {fd:.1e}, harmonic {harm:.1e}, H {hb.real:.8f} vs plane {cl.real:.8f}"


@timed(180.0)
def criterion_7():
    """Boyd estimates on SU(2) never exceed the bound; p = 2 (1,0,0) hits 1.0."""
    reps = lpn.norm_suite(lpn.norm_specs(), 1.0)
    worst = min(r.theorem_bound + 1e-6 - r.estimate for r in reps)
    sharp = next(r for r in reps if (r.spec["a"], r.spec["b"], r.spec["c"], r.spec["alpha"], r.spec["p"])
                 == (1, 0, 0, 0.0, 2.0))
    ok = worst >= 0 and abs(sharp.estimate - 1.0) <= 1e-9
    return ok, f"{len(reps)} specs, min margin {worst:.3g}, sharpness estimate {sharp.estimate:.12f}"


@timed(60.0)
def criterion_8():
    """2 S_A = Z pinv(-L + 1/2) on su2; |A_11| = sqrt 2 to 1e-12."""
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    worst = 0.0
    for b in su2_blocks():
        R0, _, _ = blk.spectral_pinv(b, 0.5)
        worst = max(worst, ops.restricted_norm(2 * ops.S_A_operator(b, A, 0.5) - b.Z @ R0, b))
    nrm = abs(ops.matrix_norm(ops.martingale_matrix(1, 0, 0)) - math.sqrt(2))
    return worst <= 1e-9 and nrm <= 1e-12, f"S_A residual {worst:.1e}, norm error {nrm:.1e}"


@timed(180.0)
def criterion_9():
    """Martingale pairing within max(3 SE, 5%) on 4 configs at 2e5 paths; Var z_T = T^2/4."""
    parts, ok = [], True
    for cfg in sto.regression_configs(200_000, seed=0):
        est = sto.martingale_pairing_estimate(cfg)
        good, gap = sto.agreement(est, sto.duality_reference(cfg))
        ok &= good
        parts.append(f"{cfg.name} gap/SE {gap / est.se:.2f}")
    T = 1.0
    z = sto.simulate_hbm_heisenberg(T, T / 100, 200_000, seed=0).states[:, 2]
    zc = (z - z.mean()) ** 2
    dev = abs(zc.mean() - T * T / 4) / (zc.std() / math.sqrt(len(z)))
    ok &= dev <= 3
    return bool(ok), "; ".join(parts) + f"; Var z_T off by {dev:.2f} SE"


@timed(1200.0)
def criterion_10():
    """Byte-identical reports for equal seeds; `--suite all` under 10 minutes."""
    outs, times = [], []
    with tempfile.TemporaryDirectory() as d:
        for i in range(2):
            path = os.path.join(d, f"r{i}.json")
            t = time.perf_counter()
            proc = subprocess.run([sys.executable, "-m", "rieszlab.cli", "verify", "--suite", "all",
                                   "--seed", "0", "--out", path], capture_output=True, text=True)
            times.append(time.perf_counter() - t)
            if proc.returncode not in (0, 1):
                return False, f"run failed: {proc.stderr[-300:]}"
            with open(path) as fh:
                rep = json.load(fh)
            rep.pop("timing")
            outs.append(json.dumps(rep, sort_keys=True))
    same = outs[0] == outs[1]
    return same and max(times) < 600, f"identical {same}, runs {times[0]:.0f} s and {times[1]:.0f} s"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def summary_lines():
    return [f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}" for n, (ok, detail) in sorted(RESULTS.items())]


@pytest.mark.parametrize("n", range(1, 11))
def test_criterion(n):
    ok, detail = CRITERIA[n - 1]()
    RESULTS[n] = (ok, detail)
    assert ok, detail


if __name__ == "__main__":
    for n, fn in enumerate(CRITERIA, 1):
        RESULTS[n] = fn()
        print(summary_lines()[-1], flush=True)
