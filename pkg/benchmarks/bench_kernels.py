#!/usr/bin/env python3
"""Benchmark the compiled forward kernel against the numpy fallback.

The batched MLP forward dominates audit runtime (the Euler sampler calls
it up to 2 * steps times per chunk), so this script times both backends
on shapes matching real sampling workloads and reports the speedup.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import statistics
import time

import numpy as np

from fairgen.numkit.backend import BACKEND_NAME, forward_batch, forward_batch_numpy
from fairgen.numkit.mlp import MlpNetwork

# (label, batch, layer_dims) — sampler-shaped (image + t + condition -> image)
CASES = [
    ("tiny net, cli chunk", 256, [277, 48, 256]),
    ("default net, cli chunk", 256, [277, 64, 64, 256]),
    ("default net, full cell", 1600, [277, 64, 64, 256]),
    ("wide net, cli chunk", 256, [277, 256, 256, 256]),
    ("fixture net, big batch", 8000, [23, 64, 64, 2]),
]


def _time(fn, weights, biases, x, repeats):
    fn(weights, biases, x)  # warm up
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(weights, biases, x)
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    if BACKEND_NAME != "cython":
        print("note: compiled backend not available; timing numpy against itself")
    print(f"active backend: {BACKEND_NAME}")
    print(f"{'case':<26} {'batch':>6} {'numpy ms':>10} {'compiled ms':>12} {'speedup':>8}")
    rng = np.random.Generator(np.random.PCG64(0))
    for label, batch, dims in CASES:
        net = MlpNetwork.random(dims, rng)
        x = rng.standard_normal((batch, dims[0]))
        t_np = _time(forward_batch_numpy, net.weights, net.biases, x, args.repeats)
        t_fast = _time(forward_batch, net.weights, net.biases, x, args.repeats)
        out_np = forward_batch_numpy(net.weights, net.biases, x)
        out_fast = forward_batch(net.weights, net.biases, x)
        err = float(np.max(np.abs(out_np - out_fast)))
        assert err < 1e-10, f"backend outputs diverge: {err}"
        print(
            f"{label:<26} {batch:>6} {t_np * 1e3:>10.3f} {t_fast * 1e3:>12.3f} "
            f"{t_np / t_fast:>7.2f}x"
        )


if __name__ == "__main__":
    main()
