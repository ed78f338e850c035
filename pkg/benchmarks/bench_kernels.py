"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--seed 0]

Times the phase ascent on a realistic subproblem, the rate-LP grid scan and
one full delay-constrained optimization, and checks both backends agree.
"""
import argparse
import contextlib
import timeit

import numpy as np

from crossris import _kernels_py, kernels
from crossris.alloc import _scaled, _stacked_forms, lp_slot_weights, optimize_p2, time_grid
from crossris.channel import draw_channel_set
from crossris.config import SystemConfig
from crossris.linkmodel import capacities
from crossris.phase import SolverParams, ascent_arrays

try:
    from crossris import _kernels
except ImportError:
    _kernels = None


@contextlib.contextmanager
def backend(module):
    saved = kernels.maxmin_ascent, kernels.lp_bisect_grid
    kernels.maxmin_ascent, kernels.lp_bisect_grid = module.maxmin_ascent, module.lp_bisect_grid
    try:
        yield
    finally:
        kernels.maxmin_ascent, kernels.lp_bisect_grid = saved


def cases(seed):
    config = SystemConfig()
    ch = draw_channel_set(config, np.random.default_rng(seed))
    phi = np.ones(config.N, dtype=np.complex128)
    arrays = _scaled(_stacked_forms(ch, phi), lp_slot_weights(time_grid(config.solver.k_max)[49]))
    params = SolverParams.from_settings(config.solver)
    caps = capacities(ch, phi)
    grid = time_grid(config.solver.k_max)
    t1 = np.array([a.T1 for a in grid])
    t2 = np.array([a.T2 for a in grid])
    return {
        "phase ascent (N=16)": lambda: ascent_arrays(*arrays, phi, params)[0],
        "rate LP grid (99 points)": lambda: kernels.lp_bisect_grid(caps, t1, t2, 60),
        "optimize_p2 (one realization)": lambda: optimize_p2(config, ch).F,
    }


def best_time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.2 and number < 10_000:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the numpy backend is available")
    print(f"{'case':32s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s}  agree")
    for name, fn in cases(args.seed).items():
        with backend(_kernels_py):
            ref = fn()
            t_py = best_time(fn, args.repeat)
        if _kernels is None:
            print(f"{name:32s} {t_py * 1e3:10.3f} {'-':>10s} {'-':>8s}")
            continue
        with backend(_kernels):
            got = fn()
            t_cy = best_time(fn, args.repeat)
        agree = np.allclose(got, ref, rtol=1e-9, atol=0)
        print(f"{name:32s} {t_py * 1e3:10.3f} {t_cy * 1e3:10.3f} {t_py / t_cy:7.1f}x  {agree}")


if __name__ == "__main__":
    main()
