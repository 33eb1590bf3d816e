"""Time the compiled kernels against the pure-Python fallback.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat N]``.
Both implementations are called with identical arguments; the script also
checks that their results agree bit for bit.
"""

from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from mnlab import _purepy

try:
    from mnlab import _kernels
except ImportError:  # pragma: no cover
    _kernels = None

CASES = {
    "timemap_integral": (
        "timemap_integral",
        (0.0, 1.0, 1.0, 40.0, 42.0, 3.0, 1.0, 0.0, 0.5, 1e-12, 1e-12, 12),
        {},
    ),
    "integrate_nonlinear": (
        "integrate_nonlinear",
        (0.0, 30.0, 0.0, 0.25, -5.0, 3.0, 1e-11, 1e-11, math.inf),
        {},
    ),
    "integrate_nonlinear+samples": (
        "integrate_nonlinear",
        (0.0, 30.0, 0.0, 0.25, -5.0, 3.0, 1e-11, 1e-11, math.inf),
        {"sample_x": np.linspace(0.0, 0.25, 201)},
    ),
}


def _same(a, b) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return a is None and b is None or np.array_equal(np.asarray(a), np.asarray(b))
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    return a == b or (a != a and b != b)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernels not built; nothing to compare")
        return
    print(f"{'kernel':30s} {'compiled [us]':>14s} {'python [us]':>14s} {'speed-up':>9s}  identical")
    for label, (name, pos, kw) in CASES.items():
        fc, fp = getattr(_kernels, name), getattr(_purepy, name)
        same = _same(tuple(fc(*pos, **kw)), tuple(fp(*pos, **kw)))
        n = 20
        tc = min(timeit.repeat(lambda: fc(*pos, **kw), number=n, repeat=args.repeat)) / n
        tp = min(timeit.repeat(lambda: fp(*pos, **kw), number=n, repeat=args.repeat)) / n
        print(f"{label:30s} {tc * 1e6:14.1f} {tp * 1e6:14.1f} {tp / tc:9.1f}  {same}")


if __name__ == "__main__":
    main()
