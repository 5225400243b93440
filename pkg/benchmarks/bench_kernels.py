"""Compare the compiled and pure-numpy kernel backends.

Each backend is timed in its own subprocess because the backend is chosen
once at import time from MOODRANK_BACKEND. Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --repeats 50
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def build_problem():
    from moodrank.model import DEFAULT_DEEP_DIMS, DEFAULT_WIDE_DIMS, TrainConfig, _init_params

    rng = np.random.default_rng(0)
    deep_dims = np.array(DEFAULT_DEEP_DIMS, dtype=np.int64)
    wide_dims = np.array(DEFAULT_WIDE_DIMS, dtype=np.int64)
    deep_act = np.ones(len(DEFAULT_DEEP_DIMS) - 1, dtype=np.int64)
    wide_act = np.ones(len(DEFAULT_WIDE_DIMS) - 1, dtype=np.int64)
    params = _init_params(rng, DEFAULT_DEEP_DIMS, DEFAULT_WIDE_DIMS)
    batch = TrainConfig().batch_size
    x_deep = rng.standard_normal((batch, DEFAULT_DEEP_DIMS[0]))
    x_wide = rng.standard_normal((batch, DEFAULT_WIDE_DIMS[0]))
    target = rng.standard_normal((batch, 2))
    return params, deep_dims, wide_dims, deep_act, wide_act, x_deep, x_wide, target


def time_call(fn, repeats):
    # One untimed call first: for the compiled backend it pays the JIT cost.
    fn()
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run_backend(repeats):
    from moodrank import kernels

    params, dd, wd, da, wa, x_deep, x_wide, target = build_problem()
    rng = np.random.default_rng(1)
    n_songs = 100_000
    song_va = rng.uniform(1.0, 5.0, size=(n_songs, 2))
    mem_ue = rng.uniform(0.0, 1.0, size=n_songs)
    mem_ea = rng.uniform(0.0, 1.0, size=n_songs)

    grad = kernels.head_loss_grad(x_deep, x_wide, target, params, dd, wd, da, wa, 1.0)[1]
    # Adam mutates its buffers in place; timing reuses one set, which leaves
    # the arithmetic identical.
    p_bench = params.copy()
    m = np.zeros_like(params)
    v = np.zeros_like(params)

    timings = {
        "backend": kernels.active_backend(),
        "forward_batch32": time_call(
            lambda: kernels.head_forward(x_deep, x_wide, params, dd, wd, da, wa),
            repeats),
        "loss_grad_batch32": time_call(
            lambda: kernels.head_loss_grad(x_deep, x_wide, target, params,
                                           dd, wd, da, wa, 1.0),
            repeats),
        "adam_step": time_call(
            lambda: kernels.adam_update(p_bench, grad, m, v, 1, 1e-3,
                                        0.9, 0.999, 1e-8),
            repeats),
        "score_100k_songs": time_call(
            lambda: kernels.score_candidates(song_va, 2.5, 3.5, mem_ea, mem_ue,
                                             1.0, 1.0),
            repeats),
    }
    json.dump(timings, sys.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=200,
                        help="timed repetitions per kernel (best-of is reported)")
    parser.add_argument("--backend-run", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.backend_run:
        run_backend(args.repeats)
        return

    backends = ["numpy"]
    try:
        import numba  # noqa: F401
        backends.append("numba")
    except ImportError:
        print("numba not importable; timing the numpy backend only", file=sys.stderr)

    results = []
    for backend in backends:
        env = dict(os.environ, MOODRANK_BACKEND=backend)
        probe = subprocess.run(
            [sys.executable, os.path.abspath(__file__),
             "--backend-run", "--repeats", str(args.repeats)],
            capture_output=True, text=True, env=env, check=True,
        )
        results.append(json.loads(probe.stdout))

    names = [k for k in results[0] if k != "backend"]
    width = max(len(n) for n in names)
    header = f"{'kernel':<{width}}" + "".join(f"  {r['backend']:>12}" for r in results)
    if len(results) == 2:
        header += f"  {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name in names:
        row = f"{name:<{width}}"
        for r in results:
            row += f"  {r[name] * 1e6:>10.1f}us"
        if len(results) == 2:
            row += f"  {results[0][name] / results[1][name]:>8.2f}x"
        print(row)


if __name__ == "__main__":
    main()
