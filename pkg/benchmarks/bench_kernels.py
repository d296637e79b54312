"""Compiled versus numpy kernels.

Times each kernel on both backends in-process, then one end-to-end pattern
run per backend in a subprocess (the backend is fixed at import through
``MBQAOA_KERNELS``).

    python benchmarks/bench_kernels.py [--qubits 20] [--repeat 5]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from mbqaoa.kernels import available_backends

E2E = """
import time
from mbqaoa import kernels
from mbqaoa.graph import complete_graph
from mbqaoa.pattern import assemble_pattern
from mbqaoa.simulator import run_pattern
pat = assemble_pattern(complete_graph(5), 4, 2)
t0 = time.perf_counter()
for s in range(5):
    run_pattern(pat, [0.3, 0.6], [0.2, 0.4], seed=s)
print(kernels.BACKEND, (time.perf_counter() - t0) / 5)
"""


def kernel_cases(n: int):
    rng = np.random.default_rng(0)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    amps /= np.linalg.norm(amps)
    masks = rng.integers(1, 1 << n, 64).astype(np.uint64)
    coeffs = rng.normal(size=64)
    diag = rng.normal(size=1 << n)
    us, vs = np.array([0, 1, 2, 3, 4, 5, 6]), np.array([1, 2, 3, 4, 5, 6, 7])
    ws = np.ones(7)
    return {
        "z_diagonal(64 terms)": lambda k: k.z_diagonal(masks, coeffs, n),
        "apply_cz": lambda k: k.apply_cz(amps, 3, n - 2),
        "apply_rx": lambda k: k.apply_rx(amps, n // 2, 0.3),
        "apply_phase": lambda k: k.apply_phase(amps, diag, 0.1),
        "project_out": lambda k: k.project_out(amps, n // 2, 0.6, 0.8j),
        "cut_values(4^8)": lambda k: k.cut_values(8, 4, us, vs, ws, 0, 4**8),
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--qubits", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the numpy kernels only")
    names = sorted(backends)
    print(f"{'kernel':<24}" + "".join(f"{b:>12}" for b in names) + ("     speedup" if len(names) == 2 else ""))
    for label, fn in kernel_cases(args.qubits).items():
        times = [min(timeit.repeat(lambda: fn(backends[b]), number=1, repeat=args.repeat)) for b in names]
        row = f"{label:<24}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(names) == 2:
            row += f"{times[1] / times[0]:>11.2f}x"
        print(row)

    print("\nend-to-end run_pattern, K5 graph, K=4, p=2 (mean of 5):")
    for b in names:
        env = dict(os.environ, MBQAOA_KERNELS=b)
        out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"  {backend:<8} {float(secs) * 1e3:8.2f}ms")


if __name__ == "__main__":
    main()
