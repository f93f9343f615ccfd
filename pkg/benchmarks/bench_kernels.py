"""Compare the numba and numpy kernel backends.

Each backend runs in its own subprocess because the choice is fixed at import
(``DBEC_BACKEND``). Reports the best-of-N wall time per call for the pointwise
kernels and for one full split step (two FFTs plus the dipolar convolution).

    python3 benchmarks/bench_kernels.py --n 64 --repeat 20
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _best(fn, repeat):
    fn()  # warm-up (numba compilation, FFT plans)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def measure(n, repeat):
    import numpy as np

    from dbec import _kernels
    from dbec.dynamics import Propagator
    from dbec.functionals import PhysParams
    from dbec.grid import gaussian, make_grid

    grid = make_grid(n, 8.0)
    rng = np.random.default_rng(0)
    z = gaussian(grid, (1.0, 1.2, 1.5)).values * np.exp(1j * rng.standard_normal(grid.shape))
    w = grid.k2
    phi = rng.standard_normal(grid.shape)
    v = grid.r2
    p = PhysParams(-1.0, 0.3, trap=0.5)
    prop = Propagator(grid, p, 1e-3)
    psi = z.copy()

    def step():
        nonlocal psi
        psi, _ = prop.advance(psi, 1)

    timings = {
        "abs2": _best(lambda: _kernels.abs2(z), repeat),
        "weighted_abs2_sum": _best(lambda: _kernels.weighted_abs2_sum(z, w), repeat),
        "weighted_abs2_sum2": _best(lambda: _kernels.weighted_abs2_sum2(z, w, v), repeat),
        "nonlinear_phase": _best(lambda: _kernels.nonlinear_phase(psi.copy(), v, -1.0, phi,
                                                                   0.3, 1e-3), repeat),
        "masked_fraction": _best(lambda: _kernels.masked_fraction(z, w, grid.tail_mask), repeat),
        "split_step": _best(step, repeat),
    }
    return {"backend": _kernels.BACKEND, "n": n, "timings": timings}


def run_backend(backend, n, repeat):
    env = dict(os.environ, DBEC_BACKEND=backend)
    out = subprocess.run([sys.executable, __file__, "--worker", "--n", str(n),
                          "--repeat", str(repeat)], env=env, check=True, capture_output=True,
                         text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=64, help="points per axis")
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--json", metavar="FILE", help="also write raw timings here")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.worker:
        print(json.dumps(measure(args.n, args.repeat)))
        return 0
    res = {b: run_backend(b, args.n, args.repeat) for b in ("numpy", "numba")}
    nb, np_ = res["numba"]["timings"], res["numpy"]["timings"]
    print(f"grid {args.n}^3, best of {args.repeat}")
    print(f"{'kernel':<20} {'numpy [ms]':>11} {'numba [ms]':>11} {'speed-up':>9}")
    for k in np_:
        print(f"{k:<20} {1e3 * np_[k]:11.3f} {1e3 * nb[k]:11.3f} {np_[k] / nb[k]:9.2f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(res, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
