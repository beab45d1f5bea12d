"""Compare the compiled and pure-numpy kernel backends.

Run with the compiled path enabled so both implementations are present:

    CLOSEREAD_BACKEND=numba python3 benchmarks/bench_kernels.py

Under CLOSEREAD_BACKEND=numpy only the fallback is timed (useful as a
baseline on machines without a working numba install).
"""

import argparse
import time

import numpy as np

from closeread._kernels import BACKEND, implementations


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tokens", type=int, nargs="+",
                    default=[2_000, 20_000, 100_000],
                    help="corpus sizes for the suffix-array build")
    ap.add_argument("--queries", type=int, default=2_000,
                    help="substring lookups per timed run")
    ap.add_argument("--strlen", type=int, default=400,
                    help="string length for the edit-distance pairs")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    impls = implementations()
    if "numba" not in impls:
        print(f"backend={BACKEND}: compiled kernels unavailable, "
              "timing the numpy fallback only\n")

    # one throwaway call per kernel so jit compilation stays out of the clock
    tiny = np.array([1, 2, 1], dtype=np.int64)
    for kit in impls.values():
        sa = kit["suffix_array"](tiny)
        kit["suffix_bounds"](tiny, sa, tiny[:1])
        kit["indel_distance"](tiny, tiny)

    header = f"{'kernel':<28}{'size':>10}" + "".join(
        f"{name + ' (s)':>14}" for name in impls) + (
        f"{'speedup':>10}" if len(impls) == 2 else "")
    print(header)
    print("-" * len(header))

    def report(label, size, make_run):
        row = f"{label:<28}{size:>10}"
        seconds = []
        for kit in impls.values():
            t = best_of(make_run(kit), args.repeats)
            seconds.append(t)
            row += f"{t:>14.5f}"
        if len(seconds) == 2:
            row += f"{seconds[0] / seconds[1]:>9.1f}x"
        print(row)

    for n in args.tokens:
        arr = rng.integers(0, 128, size=n).astype(np.int64)
        report("suffix_array build", n,
               lambda kit, arr=arr: lambda: kit["suffix_array"](arr))

    arr = rng.integers(0, 128, size=max(args.tokens)).astype(np.int64)
    sa_by_backend = {name: kit["suffix_array"](arr)
                     for name, kit in impls.items()}
    starts = rng.integers(0, len(arr) - 3, size=args.queries)
    queries = [arr[s:s + 3] for s in starts]

    def run_bounds(kit):
        sa = sa_by_backend["numba" if kit is impls.get("numba") else "numpy"]
        def go():
            for q in queries:
                kit["suffix_bounds"](arr, sa, q)
        return go

    report(f"suffix_bounds x{args.queries}", len(arr), run_bounds)

    a = rng.integers(0, 26, size=args.strlen).astype(np.int64)
    b = a.copy()
    flips = rng.integers(0, args.strlen, size=args.strlen // 10)
    b[flips] = rng.integers(0, 26, size=flips.size)

    report("indel_distance", args.strlen,
           lambda kit: lambda: kit["indel_distance"](a, b))


if __name__ == "__main__":
    main()
