"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]

Both implementations get identical inputs; results are checked for equality
before any timing is reported.
"""

import argparse
import random
import sys
import timeit

import numpy as np

from modlab import _pykernels

try:
    from modlab import _ckernels
except ImportError:
    _ckernels = None


def monotone_table(rng, n):
    t = [rng.getrandbits(n) if rng.random() < 0.2 else 0 for _ in range(1 << n)]
    for x in range(1 << n):
        sub = x
        while sub:
            sub = (sub - 1) & x
            t[x] |= t[sub]
    return t


def workloads(rng):
    n = 40
    succ1 = [rng.getrandbits(n) & rng.getrandbits(n) for _ in range(n)]
    succ2 = [rng.getrandbits(n) & rng.getrandbits(n) for _ in range(n)]
    full = [(1 << n) - 1] * n
    yield "greatest bisimulation, Kripke 40x40", "gbisim_kripke", (succ1, succ2, full)
    yield "bisimulation check, Kripke 40x40", "kripke_violation", (succ1, succ1, [1 << i for i in range(n)])

    m = 8
    t1, t2 = monotone_table(rng, m), monotone_table(rng, m)
    yield "greatest bisimulation, neighborhood 8x8", "gbisim_nbd", (t1, t2, [(1 << m) - 1] * m, m)

    bits = 16
    # truth sets grow with the valuation index, so the sweep runs to the end
    table = np.arange(1 << bits, dtype=np.uint64) & np.uint64(63)
    yield "monotone sweep, 2^16 rows, no violation", "first_monotone_violation", (table, (1 << bits) - 1)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
        return 1
    rng = random.Random(args.seed)
    print(f"{'workload':42} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for label, name, inputs in workloads(rng):
        py, c = getattr(_pykernels, name), getattr(_ckernels, name)
        want = py(*inputs)
        got = c(*inputs)
        if (list(got) if hasattr(got, "__len__") and not isinstance(got, tuple) else got) != want:
            print(f"{label}: implementations disagree")
            return 2
        tp = min(timeit.repeat(lambda: py(*inputs), number=1, repeat=args.repeat)) * 1e3
        tc = min(timeit.repeat(lambda: c(*inputs), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:42} {tp:10.3f} {tc:10.3f} {tp / tc:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
