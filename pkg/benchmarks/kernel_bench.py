"""Timing comparison of the numba kernels against the pure-numpy fallback.

Usage: python benchmarks/kernel_bench.py [--repeat 5]

The same comparison is what the BALANCENET_NO_NUMBA=1 flag switches at
runtime; numbers here are per simulated step.
"""

import argparse
import time

import numpy as np

from balancenet._kernels import IMPLEMENTATIONS, numba_available


def electrical_case(n=3000, steps=400):
    g = np.random.default_rng(1)
    states = g.normal(size=(n, 2))
    noise = g.normal(size=(steps, n))
    args = (noise, 1e-5, 300.0, -1.0, 5.0, -4.0, 4.0, 0.005, 6.0, 1.0)
    return "electrical n=%d" % n, states, args, steps


def chemical_case(n=3000, steps=200):
    g = np.random.default_rng(2)
    states = g.normal(loc=1.0, size=(2 * n, 3))
    states[:, 2] = g.uniform(0, 1, size=2 * n)
    noise = g.normal(size=(steps, 2 * n))
    coef = 600.0 * np.array([[0.3, -1.0], [2.0, -10.0]])
    offsets = np.array([0, n, 2 * n], dtype=np.int64)
    args = (noise, 1e-5, coef, np.array([1.0, -1.0]), offsets,
            -1.0, 1.3, -0.3, 0.0, 0.4, 1.5, 1.0, 0.5, 1.0, -2.0, 1.0, 1.0)
    return "chemical  N=%d" % (2 * n), states, args, steps


def fp_case(m=1024, steps=4000):
    faces = np.linspace(-8, 8, m + 1)
    centers = 0.5 * (faces[:-1] + faces[1:])
    dx = faces[1] - faces[0]
    mu = np.exp(-(centers - 1) ** 2 / 0.2)
    mu /= mu.sum() * dx
    state = mu
    args = (np.zeros(m + 1), faces - faces ** 3, faces.copy(),
            (1.0 + 1.0 / (1.0 + np.exp(-(centers - 3.0)))) * dx,
            5.0, 4.5, dx, 1e-5, steps, np.zeros(steps))
    return "fp grid M=%d" % m, state, args, steps


def run_case(maker, repeat):
    rows = []
    for backend in ("numpy", "numba"):
        impl_entry = None
        name, state, args, steps = maker()
        key = {"electrical": "electrical_chunk", "chemical": "chemical_chunk",
               "fp": "fp_chunk"}[name.split()[0].strip()]
        impl = IMPLEMENTATIONS[key][backend]
        if impl is None:
            rows.append((name, backend, float("nan")))
            continue
        impl(state.copy() if state.ndim else state, *args)  # warm up / compile
        best = float("inf")
        for _ in range(repeat):
            name, state, args, steps = maker()
            t0 = time.perf_counter()
            impl(state, *args)
            best = min(best, (time.perf_counter() - t0) / steps)
        rows.append((name, backend, best))
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not numba_available():
        print("numba not available; only the numpy path will be timed")
    print(f"{'case':<20} {'backend':<8} {'us/step':>10} {'speedup':>8}")
    for maker in (electrical_case, chemical_case, fp_case):
        rows = run_case(maker, args.repeat)
        base = rows[0][2]
        for name, backend, per_step in rows:
            speed = base / per_step if per_step == per_step and per_step > 0 else float("nan")
            print(f"{name:<20} {backend:<8} {per_step * 1e6:>10.2f} {speed:>7.2f}x")


if __name__ == "__main__":
    main()
