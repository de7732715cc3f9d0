"""Timing of the compiled kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from delaywave import BirthFunction, ModelParams, compiled_available, integrate, use_backend
from delaywave import _kernels
from delaywave.dde import History
from delaywave.pdesim import PdeState, stable_dt


def bench_dde():
    g = BirthFunction.nicholson(math.exp(2.0))
    integrate(g, ModelParams(0.5), History.exponential(0.01, 0.8), 200.0, 0.005, scheme="rk4")


def bench_pde():
    g = BirthFunction.nicholson(math.exp(2.0))
    x = np.linspace(0.0, 80.0, 801)
    u0 = 2.0 / (1.0 + np.exp(x - 10.0))
    dt = stable_dt(0.1, 1.0, 0.5)
    st = PdeState.create(u0, 0.0, 80.0, dt, ModelParams(0.5), "dirichlet", 2.0)
    st.advance(g, 2000, 1.0)


def bench_sweeps():
    rng = np.random.default_rng(0)
    f = rng.random(20000)
    for _ in range(20):
        _kernels.wave_sweeps(f, 0.99, 0.3, 0.4, 0.0, 0.95, 0.2, 0.25, 0.0)


CASES = [("dde_run", bench_dde), ("pde_advance", bench_pde), ("wave_sweeps", bench_sweeps)]


def best_of(fn, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["python"] + (["cython"] if compiled_available() else [])
    print(f"{'kernel':<14}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, fn in CASES:
        times = []
        for b in backends:
            use_backend(b)
            fn()  # warm up
            times.append(best_of(fn, args.repeat))
        line = f"{name:<14}" + "".join(f"{t:>11.4f}s" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
