"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--quick]

Each case is run once per backend (after a warm-up on a small input) and
the results are compared for agreement.
"""
import argparse
import math
import time

import numpy as np

from phasestab import _pykernels

try:
    from phasestab import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def lifts(N, d, seed=0):
    v = np.random.default_rng(seed).standard_normal((N, d))
    return np.ascontiguousarray(np.einsum("ni,nj->nij", v, v))


def cases(quick):
    ns = (12, 14) if quick else (16, 18, 20)
    for N in ns:
        P = lifts(N, 3)
        yield f"split_scan N={N} d=3", "split_scan", (P, 1e-8, 64)
    for m, w in ((2, 20000), (6, 20000)) if quick else ((2, 200000), (6, 200000), (12, 200000)):
        yield f"sinc_gap_sq m={m} window={w}", "sinc_gap_sq", (m, w)
    span = 10**6 if quick else 10**7
    yield f"far_gap_sum {span} labels", "far_gap_sum", (3, 4003, math.sin(1.0) / 1.0 * 0.01, 0.9999, -span // 2, span // 2)


def timed(fn, args):
    t = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t, out


def scalar(out):
    return out[0] if isinstance(out, tuple) else out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not available; only the NumPy backend can run")
    _pykernels.split_scan(lifts(6, 2), 1e-8, 8)
    print(f"{'case':<34}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>10}  agree")
    for name, fn, a in cases(args.quick):
        tp, op = timed(getattr(_pykernels, fn), a)
        if _ckernels is None:
            print(f"{name:<34}{tp:>12.4f}{'-':>12}{'-':>10}")
            continue
        tc, oc = timed(getattr(_ckernels, fn), a)
        sp, sc = scalar(op), scalar(oc)
        agree = abs(sp - sc) <= 1e-9 * max(abs(sp), abs(sc), 1e-300)
        print(f"{name:<34}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}  {agree}")


if __name__ == "__main__":
    main()
