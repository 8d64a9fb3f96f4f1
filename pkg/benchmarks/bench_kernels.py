"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--qubits 12] [--repeat 20]
"""
import argparse
import importlib
import timeit

import numpy as np

from qplab import _kernels_py
from qplab.qcore import haar_unitary


def _cases(n: int):
    rng = np.random.default_rng(0)
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    psi /= np.linalg.norm(psi)
    g1, g2 = haar_unitary(2, 1), haar_unitary(4, 2)
    probs = rng.random(1 << n)
    cdf = np.cumsum(probs / probs.sum())
    u = rng.random(100_000)
    p = np.full(100_000, 0.3)
    return {
        "apply_1q": lambda k: k.apply_1q(psi, g1, n // 2),
        "apply_2q": lambda k: k.apply_2q(psi, g2, 1, n - 2),
        "sample_categorical": lambda k: k.sample_categorical(cdf, u),
        "bernoulli_counts": lambda k: k.bernoulli_counts(p, u, 50),
    }


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--qubits", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    impls = {"python": _kernels_py}
    try:
        impls["cython"] = importlib.import_module("qplab._kernels")
    except ImportError:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':<20}" + "".join(f"{k:>14}" for k in impls) + ("    speedup" if len(impls) > 1 else ""))
    for name, fn in _cases(args.qubits).items():
        times = {k: min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for k, m in impls.items()}
        row = f"{name:<20}" + "".join(f"{times[k] * 1e6:>12.1f}us" for k in impls)
        if len(impls) > 1:
            row += f"{times['python'] / times['cython']:>10.1f}x"
        print(row)


if __name__ == "__main__":
    main()
