"""Benchmark the numba-accelerated hot kernels against their numpy fallbacks.

Runs every batched statevector primitive with both implementations in one
process (the numba versions are JIT-warmed before timing), then times a full
layered-embedding batch end to end in a subprocess per backend via the
QKONC_BACKEND environment variable.

Usage:
    python3 benchmarks/bench_backends.py [--qubits N] [--batch M] [--repeats R]
"""

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from qkonc import _accel


def fresh_states(rng, batch, num_qubits):
    dim = 1 << num_qubits
    raw = rng.standard_normal((batch, dim)) + 1j * rng.standard_normal((batch, dim))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def build_cases(rng, batch, num_qubits):
    """(name, args-factory) per primitive; factories rebuild mutable inputs."""
    dim = 1 << num_qubits
    target = num_qubits // 2
    gate = np.array([[0.6, 0.8j], [0.8j, 0.6]], dtype=np.complex128)
    gates = np.broadcast_to(gate, (batch, 2, 2)).copy()
    mask = _accel.cz_ladder_mask(num_qubits)
    perm = _accel.cnot_ladder_perm(num_qubits)
    base = fresh_states(rng, batch, num_qubits)
    xs = rng.uniform(-np.pi, np.pi, (batch, num_qubits))
    ys = rng.uniform(-np.pi, np.pi, (batch, num_qubits))
    return [
        ("apply_1q_uniform", lambda: (base.copy(), 0.6 + 0j, 0.8j, 0.8j, 0.6 + 0j, target)),
        ("apply_1q_rows", lambda: (base.copy(), gates, target)),
        ("apply_phase", lambda: (base.copy(), mask)),
        ("apply_perm", lambda: (base.copy(), perm)),
        ("pair_absq", lambda: (base, base[::-1].copy())),
        ("bloch_batch", lambda: (base, num_qubits)),
        ("product_cos2", lambda: (xs, ys)),
    ]


def time_call(func, args_factory, repeats):
    samples = []
    for _ in range(repeats):
        args = args_factory()
        t0 = time.perf_counter()
        func(*args)
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def bench_primitives(batch, num_qubits, repeats):
    rng = np.random.default_rng(42)
    cases = build_cases(rng, batch, num_qubits)
    numpy_impls = _accel.IMPLEMENTATIONS["numpy"]
    numba_impls = _accel.IMPLEMENTATIONS["numba"]

    print(f"\nprimitives: batch={batch}, qubits={num_qubits}, median of {repeats} runs")
    header = f"{'kernel':<18}{'numpy (ms)':>12}{'numba (ms)':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, factory in cases:
        t_np = time_call(numpy_impls[name], factory, repeats)
        if numba_impls is None:
            print(f"{name:<18}{t_np * 1e3:>12.3f}{'n/a':>12}{'n/a':>9}")
            continue
        numba_impls[name](*factory())  # JIT warmup outside the timed region
        t_nb = time_call(numba_impls[name], factory, repeats)
        print(f"{name:<18}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{t_np / t_nb:>9.2f}x")


END_TO_END = """
import time
import numpy as np
from qkonc import _accel
from qkonc.embeddings import EmbeddingSpec, embed_batch

rng = np.random.default_rng(42)
spec = EmbeddingSpec({qubits}, "hardware_efficient", layers=4)
xs = rng.uniform(-np.pi, np.pi, ({batch}, {qubits}))
embed_batch(spec, xs)  # warmup (JIT + cache)
t0 = time.perf_counter()
for _ in range({repeats}):
    embed_batch(spec, xs)
dt = (time.perf_counter() - t0) / {repeats}
print(f"{{_accel.ACTIVE_BACKEND}}: {{dt * 1e3:.1f}} ms per embed_batch call")
"""


def bench_end_to_end(batch, num_qubits, repeats):
    print(f"\nend-to-end: 4-layer embedding of {batch} points on {num_qubits} qubits")
    for backend in ("numpy", "numba"):
        env = dict(os.environ, QKONC_BACKEND=backend)
        code = END_TO_END.format(qubits=num_qubits, batch=batch, repeats=repeats)
        res = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        if res.returncode != 0:
            print(f"{backend}: unavailable ({res.stderr.strip().splitlines()[-1]})")
        else:
            print(res.stdout.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, default=10)
    ap.add_argument("--batch", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()
    print(f"active backend in this process: {_accel.ACTIVE_BACKEND}")
    bench_primitives(args.batch, args.qubits, args.repeats)
    bench_end_to_end(args.batch, args.qubits, max(3, args.repeats // 4))


if __name__ == "__main__":
    main()
