"""Compare events/second for the compiled and pure simulation engines.

Usage: python benchmarks/bench_sim.py [events]
"""

from __future__ import annotations

import sys
import time

import numpy as np

import orbittail.retrial_sim as rs
from orbittail.retrial_sim import _engine_py

try:
    from orbittail.retrial_sim import _engine_cy
except ImportError:
    _engine_cy = None


def main() -> None:
    events = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    lam1, lam2, nu = 0.2, 0.3, 1.0
    kind, sp = 0, np.array([1.0])
    args = (lam1, lam2, nu, kind, sp, 0, events, 1, 32, 10**6)
    engines = [("pure", _engine_py)]
    if _engine_cy is not None:
        engines.append(("compiled", _engine_cy))
    print(f"engine selected at import: {rs.ENGINE}")
    results = {}
    for name, engine in engines:
        start = time.perf_counter()
        engine.run(*args, rs._streams(42))
        elapsed = time.perf_counter() - start
        results[name] = events / elapsed
        print(f"{name:>9}: {events} events in {elapsed:6.2f} s "
              f"({events / elapsed / 1e6:6.2f} M events/s)")
    if len(results) == 2:
        print(f"  speedup: {results['compiled'] / results['pure']:.1f}x")


if __name__ == "__main__":
    main()
