#!/usr/bin/env python3
"""Timing comparison of the compiled and pure-Python kernel backends.

Runs the pointwise kernels and the two search kernels on identical
inputs through both implementations and reports per-call times and the
speedup factor. Usage:

    python benchmarks/bench_kernels.py [--repeat 5] [--orders 4,6,8]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from circulant3 import _pykernels

try:
    from circulant3 import _ckernels
except ImportError:
    _ckernels = None


def _time_call(func, *args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        func(*args)
        best = min(best, time.perf_counter() - start)
    return best


def _bench_pointwise(impl, m: int, points, repeat: int) -> float:
    def run():
        for x1, x2, x3 in points:
            impl.eval_form(m, 1.0, -0.5, 0.25, x1, x2, x3)
            impl.apply_power(m, 1.0, -0.5, 0.25, x1, x2, x3)
            impl.power_jacobian(m, 1.0, -0.5, 0.25, x1, x2, x3)

    return _time_call(run, repeat=repeat)


def _bench_minimize(impl, m: int, starts, repeat: int) -> float:
    return _time_call(
        impl.minimize_batch, m, 0.0, 1.0, -1.0, starts, 600, 1e-11, repeat=repeat
    )


def _bench_scan(impl, m: int, repeat: int) -> float:
    return _time_call(
        impl.scan_two_equal, m, 0.0, 1.0, -1.0, 2001, 40, repeat=repeat
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5,
                        help="repetitions per measurement (best is kept)")
    parser.add_argument("--orders", default="4,6,8",
                        help="comma-separated tensor orders")
    parser.add_argument("--points", type=int, default=2000,
                        help="evaluation points for the pointwise benchmark")
    args = parser.parse_args()
    orders = [int(s) for s in args.orders.split(",")]

    rng = np.random.default_rng(0)
    points = [tuple(map(float, rng.uniform(-1.0, 1.0, 3))) for _ in range(args.points)]
    starts = [tuple(map(float, rng.standard_normal(3))) for _ in range(32)]

    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("compiled", _ckernels))
    else:
        print("compiled extension not available; timing the fallback only")

    header = f"{'kernel':<22}{'order':>6}" + "".join(
        f"{name + ' [ms]':>16}" for name, _ in backends
    )
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))

    benches = [
        ("pointwise x{}".format(args.points), _bench_pointwise, {"points": points}),
        ("minimize_batch x32", _bench_minimize, {"starts": starts}),
        ("scan_two_equal", _bench_scan, {}),
    ]
    for label, bench, extra in benches:
        for m in orders:
            times = []
            for _, impl in backends:
                if "points" in extra:
                    t = bench(impl, m, extra["points"], args.repeat)
                elif "starts" in extra:
                    t = bench(impl, m, extra["starts"], args.repeat)
                else:
                    t = bench(impl, m, args.repeat)
                times.append(t)
            row = f"{label:<22}{m:>6}" + "".join(f"{t * 1e3:>16.3f}" for t in times)
            if len(times) == 2 and times[1] > 0:
                row += f"{times[0] / times[1]:>9.1f}x"
            print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
