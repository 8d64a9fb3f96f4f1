"""Pure numpy versions of the compiled kernels, with identical semantics."""
import numpy as np


def apply_1q(psi: np.ndarray, g: np.ndarray, q: int) -> None:
    dim = psi.shape[0]
    v = psi.reshape(dim >> (q + 1), 2, 1 << q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :].copy()
    v[:, 0, :] = g[0, 0] * a0 + g[0, 1] * a1
    v[:, 1, :] = g[1, 0] * a0 + g[1, 1] * a1


def apply_2q(psi: np.ndarray, g: np.ndarray, q0: int, q1: int) -> None:
    dim = psi.shape[0]
    n = dim.bit_length() - 1
    t = psi.reshape([2] * n)
    # numpy axis k holds qubit n-1-k
    ax0, ax1 = n - 1 - q0, n - 1 - q1
    g4 = g.reshape(2, 2, 2, 2)  # (out q1, out q0, in q1, in q0)
    out = np.tensordot(g4, t, axes=([2, 3], [ax1, ax0]))
    out = np.moveaxis(out, [0, 1], [ax1, ax0])
    psi[:] = out.reshape(dim)


def sample_categorical(cdf: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf, uniforms * cdf[-1], side="right")
    return np.minimum(idx, len(cdf) - 1).astype(np.int64)


def bernoulli_counts(probs: np.ndarray, uniforms: np.ndarray, block: int) -> np.ndarray:
    nb = uniforms.shape[0] // block
    hits = uniforms[: nb * block] < probs[: nb * block]
    return hits.reshape(nb, block).sum(axis=1).astype(np.int64)
