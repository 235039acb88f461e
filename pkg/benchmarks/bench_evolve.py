"""Wall-clock comparison of the numba and numpy integrators.

    python3 benchmarks/bench_evolve.py [--sizes 256 1024 4096] [--repeat 3]

Both backends run the same two-stream problem (N = 3, stream closure) to
T = 0.05; the first numba call is timed separately since it includes JIT
compilation (or loading from the on-disk cache).
"""
import argparse
import time

import numpy as np

from benney_sym.numeric import characteristic_speed, evolve
from benney_sym.numeric._kernels import CLOSURE_STREAMS, integrate_numba, integrate_numpy
from benney_sym.numeric.config import initial_state, sim_params

CONFIG = {
    "N": 3, "L": 1.0, "T": 0.05, "closure": "streams",
    "streams": [
        {"rho": "0.5 + 0.05*sin", "u": "-1.5 + 0.05*cos"},
        {"rho": "0.5 + 0.05*cos", "u": "1.5 + 0.05*sin(2)"},
    ],
}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    probe = initial_state({**CONFIG, "M": 64})
    v_max = 1.5 * characteristic_speed(probe, "streams")

    t0 = time.perf_counter()
    evolve(probe, sim_params({**CONFIG, "M": 64}, probe, v_max=v_max), backend="numba")
    print(f"numba warm-up (compile or cache load): {time.perf_counter() - t0:.3f}s")
    print(f"{'M':>6} {'steps':>6} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8} {'max |diff|':>11}")

    for M in args.sizes:
        cfg = {**CONFIG, "M": M}
        state = initial_state(cfg)
        p = sim_params(cfg, state, v_max=v_max)
        A, dx, dt = np.asarray(state.moments), state.dx, p.T / p.steps
        run = (A, dx, dt, p.steps, CLOSURE_STREAMS, p.bound)
        t_nb, (a_nb, _, _) = best_of(lambda: integrate_numba(*run), args.repeat)
        t_np, (a_np, _, _) = best_of(lambda: integrate_numpy(*run), args.repeat)
        diff = np.abs(a_nb - a_np).max()
        print(f"{M:>6} {p.steps:>6} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>8.1f} {diff:>11.1e}")


if __name__ == "__main__":
    main()
