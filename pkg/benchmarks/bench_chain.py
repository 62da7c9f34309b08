#!/usr/bin/env python3
"""Compare the compiled and pure-Python chain kernels.

Times the forward-backward pass and Viterbi decoding on random dense
trellises over a grid of sequence lengths and state counts, printing the
best wall time per call for every available backend and the compiled
kernel's speedup.

Run from the repository root:

    python3 benchmarks/bench_chain.py
    python3 benchmarks/bench_chain.py --positions 200 2000 --states 2 28 --repeats 9
"""

import argparse
import time

import numpy as np

from tmcrf.chain import get_backends


def random_trellis(rng, n_pos, n_states):
    start = rng.uniform(-2.0, 2.0, n_states)
    edges = rng.uniform(-2.0, 2.0, (n_pos - 1, n_states, n_states))
    return start, edges, np.zeros(n_states)


def best_time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--positions", type=int, nargs="+", default=[200, 1000])
    parser.add_argument("--states", type=int, nargs="+", default=[2, 28, 64])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = get_backends()
    names = sorted(backends)
    print(f"backends: {', '.join(names)}  (best of {args.repeats} runs, ms per call)")
    header = f"{'positions':>9}  {'states':>6}  {'kernel':<17}"
    header += "".join(f"{name:>10}" for name in names)
    if len(names) > 1:
        header += f"{'speedup':>9}"
    print(header)

    rng = np.random.default_rng(7)
    kernels = (
        ("forward-backward", lambda m, s, e, z: (m.forward(s, e), m.backward(z, e))),
        ("viterbi", lambda m, s, e, z: m.viterbi_path(s, e, z)),
    )
    for n_pos in args.positions:
        for n_states in args.states:
            start, edges, end_mask = random_trellis(rng, n_pos, n_states)
            for kernel, call in kernels:
                times = {
                    name: best_time(
                        lambda m=backends[name]: call(m, start, edges, end_mask),
                        args.repeats,
                    )
                    for name in names
                }
                row = f"{n_pos:>9}  {n_states:>6}  {kernel:<17}"
                row += "".join(f"{times[name] * 1e3:>10.3f}" for name in names)
                if "python" in times and "cython" in times:
                    row += f"{times['python'] / times['cython']:>8.1f}x"
                print(row)


if __name__ == "__main__":
    main()
