"""Time the compiled and numpy gate kernels on a random state.

    python benchmarks/bench_kernels.py --qubits 20 --repeat 5
"""

from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from thirring.kernels import backend_module


def _workload(mod, state, n):
    for q in range(n - 1):
        mod.apply_givens(state, q, 0.3)
    for q in range(n):
        mod.apply_phase(state, q, 0.7)
        mod.apply_pauli(state, q, "Y")


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--qubits", type=int, default=18)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    n = args.qubits
    rng = np.random.default_rng(0)
    base = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    base /= np.linalg.norm(base)

    results = {}
    finals = {}
    for name in ("python", "cython"):
        try:
            mod = backend_module(name)
        except ImportError:
            print(f"{name:>7}: unavailable")
            continue
        state = base.copy()
        _workload(mod, state, n)
        finals[name] = state
        times = timeit.repeat(lambda: _workload(mod, base.copy(), n), number=1, repeat=args.repeat)
        results[name] = min(times)
        gates = 3 * n - 1
        print(f"{name:>7}: {min(times) * 1e3:8.2f} ms per sweep ({gates} gates, 2^{n} amplitudes)")
    if len(finals) == 2:
        diff = float(np.max(np.abs(finals["python"] - finals["cython"])))
        print(f"max |python - cython| = {diff:.2e}")
        print(f"speedup = {results['python'] / results['cython']:.2f}x")
    assert all(math.isfinite(t) for t in results.values())


if __name__ == "__main__":
    main()
