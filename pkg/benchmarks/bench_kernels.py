"""Compare the compiled selection kernel against the pure-Python fallback.

Runs the count-threshold kernel on a batch of simulated trials with both
backends and reports wall time plus the speedup, after asserting that the two
produce bit-identical selections.

Usage: python benchmarks/bench_kernels.py [--trials 20000] [--n 400]
"""

import argparse
import time

import numpy as np

from ocrskit import RandomSource, bind, simple_ocrs, validate_instance
from ocrskit import _kernels_py

try:
    from ocrskit import _kernels_cy
except ImportError:
    _kernels_cy = None


def run(backend, prof, act, accept_coin):
    start = time.perf_counter()
    sel = backend.select_count_policy(act, prof.thr, prof.q, prof.demote_b, accept_coin, None)
    return sel, time.perf_counter() - start


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    k = args.n // 2
    inst = validate_instance(np.full(args.n, 0.5), k)
    prof = bind(simple_ocrs(), inst, np.arange(args.n)).profile
    rng = RandomSource(args.seed)
    act = (rng.uniform(size=(args.trials, args.n)) < inst.x).astype(np.uint8)
    accept_coin = rng.uniform(size=(args.trials, args.n))

    sel_py, t_py = run(_kernels_py, prof, act, accept_coin)
    print(f"python backend: {t_py:.3f}s  ({args.trials} trials, n={args.n})")
    if _kernels_cy is None:
        print("cython backend: not built")
        return
    sel_cy, t_cy = run(_kernels_cy, prof, act, accept_coin)
    assert np.array_equal(sel_py, sel_cy), "backends disagree"
    print(f"cython backend: {t_cy:.3f}s  ({args.trials} trials, n={args.n})")
    print(f"speedup: {t_py / t_cy:.1f}x (outputs bit-identical)")


if __name__ == "__main__":
    main()
