"""Time the compiled marking kernel against the numpy fallback.

    python benchmarks/bench_kernels.py --res 300 --iters 500
"""

import argparse
import time

import numpy as np

from hemishuffle import _backend, _pykernels
from hemishuffle.fatline import FatParams
from hemishuffle.geometry import equal_area_grid
from hemishuffle.pwi import Protocol, build_cut_arcs


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--res", type=int, default=300)
    ap.add_argument("--iters", type=int, default=500)
    ap.add_argument("--eps", type=float, default=0.01)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    threads = _backend.resolve_threads(args.threads)
    grid = equal_area_grid(args.res)
    fp = FatParams(args.eps, args.iters)
    print(f"grid {args.res} ({grid.size} points), N = {fp.iters}, eps = {fp.epsilon:g}, threads = {threads}")
    print(f"{'protocol':<24}{'backend':<10}{'mark s':>9}{'ns/pt-it':>10}{'iterate s':>11}{'phi':>9}")
    backends = [("numpy", _pykernels)]
    if _backend.compiled is not None:
        backends.insert(0, ("cython", _backend.compiled))
    for deg in [(57, 57, 120), (90, 60, 90), (63.4349, 63.4349, 108)]:
        pr = Protocol.from_degrees(*deg)
        trig, arcs = pr.trig(), build_cut_arcs(pr).kernel_array()
        results = {}
        for name, k in backends:
            tm, first = best_of(lambda: k.mark(grid.points, trig, arcs, fp.sin_eps, fp.cos_eps,
                                               fp.iters, threads), args.repeat)
            ti, _ = best_of(lambda: k.iterate_inverse(grid.points, trig, fp.iters, threads), args.repeat)
            results[name] = first
            ns = 1e9 * ti / (grid.size * fp.iters)
            print(f"{str(deg):<24}{name:<10}{tm:>9.3f}{ns:>10.1f}{ti:>11.3f}{np.mean(first >= 0):>9.4f}")
        if len(results) == 2:
            same = np.array_equal(results["cython"], results["numpy"])
            print(f"{'':<24}identical first hits: {same}")


if __name__ == "__main__":
    main()
