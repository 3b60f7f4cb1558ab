"""Compare the compiled and NumPy path kernels.

    python benchmarks/bench_pathcore.py [--paths 20000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from rieszlab import pathcore
from rieszlab import stochastics as sto


def bench(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.paths
    cfg = sto.regression_configs(n)[0]
    h = cfg.step
    S = int(round(cfg.T / h))
    dB1, dB2, dA = sto.heisenberg_noise(rng, n, S, h, sto.GENERATOR_SCALE)
    times = h * np.arange(S)
    K1, K2 = sto._gradient_tables(cfg, times, sto._kept_degree(cfg))
    lam, s = cfg.f.lam, cfg.f.block.meta["scale"]

    backends = sorted(pathcore.BACKENDS)
    print(f"{n} paths x {S} steps; backends: {', '.join(backends)}")
    rows = {}
    for name in backends:
        impl = pathcore.get_backend(name)

        def walk():
            x, y, z = np.zeros(n), np.zeros(n), np.zeros(n)
            impl.heisenberg_paths(x, y, z, dB1, dB2, dA)

        def mart():
            x, y, z = (rng.uniform(-5, 5, n) for _ in range(3))
            impl.martingale_paths(x, y, z, dB1, dB2, dA, K1, K2, lam, s)

        rows[name] = (bench(walk, args.repeat), bench(mart, args.repeat))
        print(f"  {name:<7} paths {rows[name][0]:8.4f} s   martingale {rows[name][1]:8.4f} s")
    if len(rows) == 2:
        (pw, pm), (cw, cm) = rows["python"], rows["cython"]
        print(f"  speed-up: paths {pw / cw:.1f}x, martingale {pm / cm:.1f}x")


if __name__ == "__main__":
    main()
