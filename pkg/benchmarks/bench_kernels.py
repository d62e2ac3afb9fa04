"""Compare the compiled and numpy kernels.

Times the WCA force evaluation alone and a full slice loop with
interactions enabled, for a few system sizes. Results agree between
backends to rounding (see tests/test_kernels.py); only speed differs.

    python benchmarks/bench_kernels.py [--sizes 500 2000 8000] [--repeat 5]
"""

import argparse
import statistics
import time

import numpy as np

from colloidrl.core import Action, SimParams
from colloidrl.engine import Interactions, LangevinEngine, available_backends, get_backend, random_colloids


class Push:
    kill_switch = False

    def calc_action(self, colloids):
        return [Action(force=1.0)] * len(colloids)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def setup(n, dim):
    # density around 0.3 particles per unit volume keeps placement quick
    side = (n / 0.3) ** (1 / dim)
    p = SimParams(kT=1.0, dt=1e-3, dim=dim, box=(side,) * dim, steps_per_slice=10)
    return p, random_colloids(p, [(0, n)], seed=1, min_separation=0.9)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 2000, 8000])
    ap.add_argument("--dim", type=int, default=2, choices=(2, 3))
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--slices", type=int, default=5)
    args = ap.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the numpy backend is timed")
    print(f"{'kernel':<10}{'N':>7}" + "".join(f"{b + ' (ms)':>16}" for b in backends) + f"{'speed-up':>10}")
    for n in args.sizes:
        p, cs = setup(n, args.dim)
        pos = np.ascontiguousarray([c.pos for c in cs])
        row = {}
        for b in backends:
            k = get_backend(b)
            row[b] = best_of(lambda: k.wca_forces(pos, p.box3, p.dim, p.periodic, 1.0, 1.0), args.repeat)[0]
        print(_line("wca", n, row, backends))
        row = {}
        for b in backends:
            def run():
                eng = LangevinEngine(p, cs, seed=0, interactions=Interactions(True), backend=b)
                eng.integrate(args.slices, Push())
            row[b] = best_of(run, max(1, args.repeat // 2))[0]
        print(_line(f"{args.slices} slices", n, row, backends))


def _line(name, n, row, backends):
    cells = "".join(f"{1e3 * row[b]:>16.2f}" for b in backends)
    speed = f"{row['python'] / row['cython']:>9.1f}x" if len(backends) == 2 else ""
    return f"{name:<10}{n:>7}{cells}{speed}"


if __name__ == "__main__":
    main()
