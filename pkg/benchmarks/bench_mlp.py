"""Timing comparison of the two kernel backends on the training-shaped
workload: batch-64 forward and backward passes through the N -> 64 -> 128 ->
256 -> N net.

Run:  python benchmarks/bench_mlp.py [--nodes 6] [--batch 64] [--repeats 200]
"""

import argparse
import time

import numpy as np

from chtdqn import approximator as ap
from chtdqn.approximator import _kernels_np

try:
    from chtdqn.approximator import _ckernels
except ImportError:
    _ckernels = None


def bench(kernel, params, states, actions, targets, repeats):
    # warmup
    kernel.forward(params.weights, params.biases, states)
    kernel.backward(params.weights, params.biases, states, actions, targets)
    t0 = time.perf_counter()
    for _ in range(repeats):
        kernel.forward(params.weights, params.biases, states)
    t_fwd = (time.perf_counter() - t0) / repeats
    t0 = time.perf_counter()
    for _ in range(repeats):
        kernel.backward(params.weights, params.biases, states, actions,
                        targets)
    t_bwd = (time.perf_counter() - t0) / repeats
    return t_fwd, t_bwd


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--nodes", type=int, default=6)
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    params = ap.init(args.nodes, args.nodes, seed=0)
    states = np.ascontiguousarray(
        (rng.random((args.batch, args.nodes)) < 0.2).astype(np.float64))
    actions = rng.integers(0, args.nodes, size=args.batch)
    targets = rng.normal(scale=100.0, size=args.batch)

    print(f"nodes={args.nodes} batch={args.batch} repeats={args.repeats}")
    results = {}
    backends = [("numpy", _kernels_np)]
    if _ckernels is not None:
        backends.append(("compiled", _ckernels))
    else:
        print("compiled backend not built; benchmarking numpy only")
    for name, kernel in backends:
        t_fwd, t_bwd = bench(kernel, params, states, actions, targets,
                             args.repeats)
        results[name] = (t_fwd, t_bwd)
        print(f"{name:>9}: forward {t_fwd * 1e6:8.1f} us   "
              f"backward {t_bwd * 1e6:8.1f} us")
    if len(results) == 2:
        f_ratio = results["numpy"][0] / results["compiled"][0]
        b_ratio = results["numpy"][1] / results["compiled"][1]
        print(f"speedup (numpy/compiled): forward {f_ratio:.2f}x, "
              f"backward {b_ratio:.2f}x")


if __name__ == "__main__":
    main()
