"""Kernel dispatch: the compiled extension when built, numpy otherwise.

Set ``QPLAB_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("QPLAB_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def _as_c128(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.complex128)


def apply_1q(psi: np.ndarray, g: np.ndarray, q: int) -> None:
    _impl.apply_1q(psi, _as_c128(g), int(q))


def apply_2q(psi: np.ndarray, g: np.ndarray, q0: int, q1: int) -> None:
    _impl.apply_2q(psi, _as_c128(g), int(q0), int(q1))


def sample_categorical(probs: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    cdf = np.ascontiguousarray(np.cumsum(np.clip(probs, 0.0, None)), dtype=np.float64)
    return _impl.sample_categorical(cdf, np.ascontiguousarray(uniforms, dtype=np.float64))


def bernoulli_counts(probs: np.ndarray, uniforms: np.ndarray, block: int) -> np.ndarray:
    return _impl.bernoulli_counts(
        np.ascontiguousarray(probs, dtype=np.float64),
        np.ascontiguousarray(uniforms, dtype=np.float64),
        int(block),
    )
