"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_core.py --n 256 --steps 2000
"""

import argparse
import time

import numpy as np

from lingering import _backend
from lingering.grid import gaussian, make_grid, sample_landscape
from lingering.perception import KernelShape, perceive


def time_stepper(kern, n, steps, repeats):
    g = make_grid(5.0, n)
    s = sample_landscape(gaussian(), g).values
    asbar = 10.0 * perceive(sample_landscape(gaussian(), g), KernelShape("bump", 1.5),
                            "normalized").values
    dt = 0.4 * g.h ** 2 / 2.0
    best = np.inf
    for _ in range(repeats):
        u, m = s.copy(), np.zeros(n)
        work = np.empty(n + 1)
        t0 = time.perf_counter()
        status, done, _ = kern.advance_steps(u, m, asbar, s, 0, 1.0, 2.0, 1.0, 0.5, dt, g.h,
                                             steps, 1, work)
        best = min(best, time.perf_counter() - t0)
        assert status == 0 and done == steps
    return best, u


def time_eigen(kern, n):
    g = make_grid(5.0, n)
    s = sample_landscape(gaussian(), g).values
    off = 1.0 / g.h ** 2
    diag = s - 2 * off
    diag[0] += off
    diag[-1] += off
    v = s.copy()
    t0 = time.perf_counter()
    rho, it, _ = kern.power_iteration(np.ascontiguousarray(diag), off, v,
                                      4 * off - s.min(), 1e-7, 5_000_000)
    return time.perf_counter() - t0, rho, it


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    backends = [("python", _backend.python)]
    if _backend.compiled is not None:
        backends.insert(0, ("compiled", _backend.compiled))
    else:
        print("compiled extension not built; timing the fallback only")

    results = {}
    for name, kern in backends:
        t, u = time_stepper(kern, args.n, args.steps, args.repeats)
        te, rho, it = time_eigen(kern, args.n)
        results[name] = (t, u, te)
        per = t / (args.steps * args.n) * 1e9
        print(f"{name:9s} stepper {t:8.4f} s  ({per:7.2f} ns/cell-step)   "
              f"eigen {te:7.3f} s  lambda1={rho:.12f} ({it} its)")
    if len(results) == 2:
        tc, uc, ec = results["compiled"]
        tp, up, ep = results["python"]
        print(f"speedup   stepper x{tp / tc:.1f}   eigen x{ep / ec:.1f}   "
              f"max |u_c - u_py| = {np.max(np.abs(uc - up)):.2e}")


if __name__ == "__main__":
    main()
