"""Exact small-system state arithmetic and distance measures.

Conventions
-----------
* Qubit ``q`` is bit ``q`` of a basis index (little-endian).
* ``tensor(a, b)`` is ``np.kron(a, b)``, so ``b`` occupies the low qubits.
* Bipartite splits ``A|B`` follow Kronecker order: ``A`` is the left factor.
"""
from __future__ import annotations

import json
from functools import reduce
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._rng import SeedLike, make_rng

ATOL = 1e-10
SUPPORT_CUTOFF = 1e-12
MAX_QUBITS = 12
SCHEMA = "qplab-1"


class DimensionError(ValueError):
    """Raised when operands have incompatible sizes or exceed the cap."""


def _n_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def _check_cap(n: int) -> None:
    if n > MAX_QUBITS:
        raise DimensionError(f"{n} qubits exceeds the cap of {MAX_QUBITS}")


@dataclass(frozen=True)
class PureState:
    """Unit-norm amplitude vector on ``n_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        n = _n_qubits_of(v.shape[0])
        _check_cap(n)
        if abs(np.vdot(v, v).real - 1.0) > ATOL:
            raise ValueError("amplitudes are not normalized")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @property
    def n_qubits(self) -> int:
        return _n_qubits_of(self.amplitudes.shape[0])

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "PureState":
        v = np.asarray(v, dtype=np.complex128).reshape(-1)
        return cls(v / np.linalg.norm(v))

    @classmethod
    def basis(cls, index: int, n_qubits: int) -> "PureState":
        v = np.zeros(1 << n_qubits, dtype=np.complex128)
        v[index] = 1.0
        return cls(v)

    def density(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()))


@dataclass(frozen=True)
class HermitianOperator:
    """Hermitian matrix; symmetrized on construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("operator must be square")
        _check_cap(_n_qubits_of(m.shape[0]))
        if np.max(np.abs(m - m.conj().T), initial=0.0) > ATOL:
            raise ValueError("operator is not Hermitian")
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_qubits(self) -> int:
        return _n_qubits_of(self.matrix.shape[0])


@dataclass(frozen=True)
class DensityMatrix:
    """Unit-trace PSD matrix; tiny negative eigenvalues are tolerated."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("density matrix must be square")
        _check_cap(_n_qubits_of(m.shape[0]))
        if np.max(np.abs(m - m.conj().T), initial=0.0) > ATOL:
            raise ValueError("density matrix is not Hermitian")
        m = (m + m.conj().T) / 2
        if abs(np.trace(m).real - 1.0) > ATOL:
            raise ValueError("density matrix trace is not 1")
        if np.linalg.eigvalsh(m)[0] < -ATOL:
            raise ValueError("density matrix is not PSD")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_qubits(self) -> int:
        return _n_qubits_of(self.matrix.shape[0])

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        d = 1 << n_qubits
        return cls(np.eye(d, dtype=np.complex128) / d)


StateLike = PureState | DensityMatrix | np.ndarray


def as_matrix(x: StateLike | HermitianOperator) -> np.ndarray:
    """Density/operator matrix of any state-like input (vectors become projectors)."""
    if isinstance(x, PureState):
        v = x.amplitudes
        return np.outer(v, v.conj())
    if isinstance(x, (DensityMatrix, HermitianOperator)):
        return x.matrix
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim == 1:
        return np.outer(a, a.conj())
    return a


def as_vector(x: PureState | np.ndarray) -> np.ndarray:
    if isinstance(x, PureState):
        return x.amplitudes
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 1:
        raise DimensionError("expected a state vector")
    return a


def is_pure_input(x) -> bool:
    return isinstance(x, PureState) or (isinstance(x, np.ndarray) and x.ndim == 1)


# ---------------------------------------------------------------- structure

def tensor(a, b):
    """Kronecker product; kinds must match."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix))
    if isinstance(a, HermitianOperator) and isinstance(b, HermitianOperator):
        return HermitianOperator(np.kron(a.matrix, b.matrix))
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray) and a.ndim == b.ndim:
        return np.kron(a, b)
    raise TypeError("tensor() operands must be of the same kind")


def kron_all(factors: Iterable[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, [np.asarray(f, dtype=np.complex128) for f in factors])


def partial_trace(state, keep_qubits: Sequence[int]):
    """Reduced state on ``keep_qubits`` (little-endian order is preserved)."""
    rho = as_matrix(state)
    n = _n_qubits_of(rho.shape[0])
    keep = sorted(int(q) for q in keep_qubits)
    if len(set(keep)) != len(keep):
        raise ValueError("keep_qubits must be distinct")
    if any(q < 0 or q >= n for q in keep):
        raise IndexError("qubit index out of range")
    out = _ptrace_axes(rho, n, keep)
    if isinstance(state, (DensityMatrix, PureState)):
        return DensityMatrix(out)
    return out


def _ptrace_axes(rho: np.ndarray, n: int, keep: list[int]) -> np.ndarray:
    # numpy axis k corresponds to qubit n-1-k
    t = rho.reshape([2] * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    kept_axes = [n - 1 - q for q in sorted(keep, reverse=True)]
    for k in range(n):
        if k not in kept_axes:
            col[k] = row[k]
    out_spec = "".join(row[k] for k in kept_axes) + "".join(col[k] for k in kept_axes)
    red = np.einsum("".join(row) + "".join(col) + "->" + out_spec, t)
    d = 1 << len(keep)
    return red.reshape(d, d)


def ptrace_kron(state, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace over Kronecker factors; ``keep`` lists factor positions."""
    dims = [int(d) for d in dims]
    keep = sorted(int(k) for k in keep)
    if is_pure_input(state):
        psi = as_vector(state).reshape(dims)
        drop = [k for k in range(len(dims)) if k not in keep]
        t = np.moveaxis(psi, keep + drop, list(range(len(dims))))
        dk = int(np.prod([dims[k] for k in keep])) if keep else 1
        m = t.reshape(dk, -1)
        return m @ m.conj().T
    rho = as_matrix(state)
    k = len(dims)
    t = rho.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:k])
    col = list(letters[k:2 * k])
    for i in range(k):
        if i not in keep:
            col[i] = row[i]
    spec = "".join(row) + "".join(col) + "->" + "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.einsum(spec, t).reshape(dk, dk)


def embed(op: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """Full 2^n matrix of ``op`` acting on ``qubits`` (local qubit j = global qubits[j])."""
    op = np.asarray(op, dtype=np.complex128)
    k = len(qubits)
    if op.shape != (1 << k, 1 << k):
        raise DimensionError("operator size does not match qubit list")
    d = 1 << n_qubits
    cols = np.eye(d, dtype=np.complex128)
    return apply_operator_batch(cols, op, qubits, n_qubits)


def apply_operator(psi: np.ndarray, op: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """Return ``op`` applied to ``qubits`` of the vector ``psi``."""
    return apply_operator_batch(np.asarray(psi, dtype=np.complex128).reshape(-1, 1), op, qubits, n_qubits)[:, 0]


def apply_operator_batch(cols: np.ndarray, op: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """Apply ``op`` on ``qubits`` to every column of ``cols``."""
    qubits = [int(q) for q in qubits]
    if len(set(qubits)) != len(qubits) or any(q < 0 or q >= n_qubits for q in qubits):
        raise IndexError("invalid qubit list")
    k = len(qubits)
    ncol = cols.shape[1]
    t = cols.reshape([2] * n_qubits + [ncol])
    # local op index bits: row = sum bit_j 2^j, so reshape axis i <-> local qubit k-1-i
    opt = np.asarray(op, dtype=np.complex128).reshape([2] * (2 * k))
    in_axes = [n_qubits - 1 - qubits[k - 1 - i] for i in range(k)]
    out = np.tensordot(opt, t, axes=(list(range(k, 2 * k)), in_axes))
    out = np.moveaxis(out, list(range(k)), in_axes)
    return out.reshape(1 << n_qubits, ncol)


def conjugate(rho: np.ndarray, op: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """``op ρ op†`` with ``op`` acting on ``qubits``."""
    left = apply_operator_batch(rho, op, qubits, n_qubits)
    return apply_operator_batch(left.conj().T, op, qubits, n_qubits).conj().T


# ---------------------------------------------------------------- spectra

def eigh_psd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return np.clip(w, 0.0, None), v


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    w, v = eigh_psd(m)
    return (v * np.sqrt(w)) @ v.conj().T


def inv_sqrt_on_support(m: np.ndarray, cutoff: float = SUPPORT_CUTOFF) -> tuple[np.ndarray, np.ndarray]:
    """Pseudo-inverse square root and the support projector."""
    w, v = eigh_psd(m)
    mask = w > cutoff
    vs = v[:, mask]
    return (vs / np.sqrt(w[mask])) @ vs.conj().T, vs @ vs.conj().T


def is_projector(m: np.ndarray, tol: float = 1e-8) -> bool:
    m = np.asarray(m)
    return bool(np.allclose(m, m.conj().T, atol=tol) and np.allclose(m @ m, m, atol=tol))


def is_bounded_psd(m: np.ndarray, tol: float = ATOL) -> bool:
    """The ``0 ⪯ M ⪯ I`` predicate."""
    m = np.asarray(m)
    if not np.allclose(m, m.conj().T, atol=tol):
        return False
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    return bool(w[0] >= -tol and w[-1] <= 1 + tol)


def min_eigenpair(h) -> tuple[float, PureState]:
    """Ground energy and a ground state (largest entry made real positive)."""
    m = as_matrix(h)
    _check_cap(_n_qubits_of(m.shape[0]))
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    g = v[:, 0]
    k = int(np.argmax(np.abs(g)))
    g = g * (abs(g[k]) / g[k])
    return float(w[0]), PureState.from_vector(g)


# ---------------------------------------------------------------- metrics

def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionError("operands have different dimensions")
    return ma, mb


def trace_distance(a, b) -> float:
    ma, mb = _pair(a, b)
    d = ma - mb
    w = np.linalg.eigvalsh((d + d.conj().T) / 2)
    return float(min(1.0, 0.5 * np.sum(np.abs(w))))


def fidelity(a, b) -> float:
    """Root fidelity ``‖√a √b‖₁``; equals ``|⟨φ|ψ⟩|`` on pure inputs."""
    if is_pure_input(a) and is_pure_input(b):
        va, vb = as_vector(a), as_vector(b)
        if va.shape != vb.shape:
            raise DimensionError("operands have different dimensions")
        return float(min(1.0, abs(np.vdot(va, vb))))
    if is_pure_input(a) or is_pure_input(b):
        v, m = (as_vector(a), as_matrix(b)) if is_pure_input(a) else (as_vector(b), as_matrix(a))
        if m.shape[0] != v.shape[0]:
            raise DimensionError("operands have different dimensions")
        return float(np.sqrt(max(0.0, min(1.0, np.vdot(v, m @ v).real))))
    ma, mb = _pair(a, b)
    s = np.linalg.svd(sqrtm_psd(ma) @ sqrtm_psd(mb), compute_uv=False)
    return float(min(1.0, np.sum(s)))


def uhlmann_unitary(phi, psi, dims: tuple[int, int] | None = None) -> np.ndarray:
    """Unitary ``U`` on the right factor with ``|⟨ψ|(I⊗U)|φ⟩| = F(Tr_B φ, Tr_B ψ)``.

    Uses the SVD of the cross amplitude matrix ``Ψ†Φ``; any valid singular
    basis is accepted when the spectrum is degenerate.
    """
    vphi, vpsi = as_vector(phi), as_vector(psi)
    if vphi.shape != vpsi.shape:
        raise DimensionError("states have different dimensions")
    if dims is None:
        n = _n_qubits_of(vphi.shape[0])
        if n % 2:
            raise DimensionError("default split needs an even number of qubits")
        dims = (1 << (n // 2), 1 << (n // 2))
    da, db = dims
    phi_m = vphi.reshape(da, db)
    psi_m = vpsi.reshape(da, db)
    w, _, vh = np.linalg.svd(psi_m.conj().T @ phi_m)
    # (I⊗U)|φ⟩ has amplitude matrix Φ Uᵀ; choose Uᵀ = V W†
    return (vh.conj().T @ w.conj().T).T


# ---------------------------------------------------------------- measurements

@dataclass(frozen=True)
class TwoOutcomePOVM:
    e0: np.ndarray
    e1: np.ndarray

    def probabilities(self, state) -> tuple[float, float]:
        m = as_matrix(state)
        p0 = float(np.real(np.trace(self.e0 @ m)))
        p1 = float(np.real(np.trace(self.e1 @ m)))
        return p0, p1

    def success_probability(self, rho0, rho1) -> float:
        """Equal-prior probability of naming the right state."""
        return 0.5 * (self.probabilities(rho0)[0] + self.probabilities(rho1)[1])


def helstrom_measurement(rho0, rho1) -> TwoOutcomePOVM:
    """Projector onto the positive part of ``ρ0 − ρ1`` and its complement."""
    m0, m1 = _pair(rho0, rho1)
    d = m0 - m1
    w, v = np.linalg.eigh((d + d.conj().T) / 2)
    vp = v[:, w > SUPPORT_CUTOFF]
    p0 = vp @ vp.conj().T
    return TwoOutcomePOVM(p0, np.eye(d.shape[0]) - p0)


def pgm(rho, sigma) -> TwoOutcomePOVM:
    """Pretty good measurement; elements sum to the support projector of (ρ+σ)/2."""
    m0, m1 = _pair(rho, sigma)
    s = (m0 + m1) / 2
    r, _ = inv_sqrt_on_support(s)
    e0 = 0.5 * r @ m0 @ r
    e1 = 0.5 * r @ m1 @ r
    return TwoOutcomePOVM((e0 + e0.conj().T) / 2, (e1 + e1.conj().T) / 2)


# ---------------------------------------------------------------- sampling

def haar_state(n_qubits: int, rng_seed: SeedLike) -> PureState:
    _check_cap(n_qubits)
    rng = make_rng(rng_seed)
    d = 1 << n_qubits
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return PureState.from_vector(v)


def haar_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def haar_unitary(dim: int, rng_seed: SeedLike) -> np.ndarray:
    rng = make_rng(rng_seed)
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(n_qubits: int, rng_seed: SeedLike, rank: int | None = None) -> DensityMatrix:
    """Induced-measure mixed state of the given rank (full rank by default)."""
    rng = make_rng(rng_seed)
    d = 1 << n_qubits
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


# ---------------------------------------------------------------- serialization

def _encode_complex(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in a]
    return [_encode_complex(row) for row in a]


def decode_complex(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def to_json(obj) -> str:
    if isinstance(obj, PureState):
        payload = {"kind": "pure", "n_qubits": obj.n_qubits, "amplitudes": _encode_complex(obj.amplitudes)}
    elif isinstance(obj, DensityMatrix):
        payload = {"kind": "density", "n_qubits": obj.n_qubits, "matrix": _encode_complex(obj.matrix)}
    elif isinstance(obj, HermitianOperator):
        payload = {"kind": "hermitian", "n_qubits": obj.n_qubits, "matrix": _encode_complex(obj.matrix)}
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    payload["version"] = SCHEMA
    return json.dumps(payload)


def from_json(text: str):
    data = json.loads(text)
    if data.get("version") != SCHEMA:
        raise ValueError(f"schema version mismatch: {data.get('version')!r}")
    kind = data.get("kind")
    if kind == "pure":
        return PureState(decode_complex(data["amplitudes"]))
    if kind == "density":
        return DensityMatrix(decode_complex(data["matrix"]))
    if kind == "hermitian":
        return HermitianOperator(decode_complex(data["matrix"]))
    raise ValueError(f"unknown kind {kind!r}")


def encode_matrix(a: np.ndarray) -> list:
    return _encode_complex(a)


# ---------------------------------------------------------------- property suite

@dataclass(frozen=True)
class PropertyCheck:
    name: str
    instances: int
    failures: int
    worst_margin: float  # min over instances of (bound slack); negative means violated

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    rank = int(rng.integers(1, (1 << n) + 1))
    return random_density(n, rng, rank).matrix


def metric_property_suite(trials: int, seed: SeedLike, n_qubits: int = 2, tol: float = 1e-8) -> list[PropertyCheck]:
    """Random-instance checks of the distance inequalities used throughout.

    Triangle inequality, Fuchs–van de Graaf, monotonicity of fidelity under
    partial trace, ``F(ρ,σ)² + F(σ,ξ)² ≤ 1 + F(ρ,ξ)`` and the tensor-power
    sandwich ``1 − e^{−lε²} < TD(ρ^{⊗l}, σ^{⊗l}) ≤ lε`` for ``l ≤ 6``.
    """
    rng = make_rng(seed)
    margins: dict[str, list[float]] = {k: [] for k in ("triangle", "fuchs_van_de_graaf", "fidelity_monotonicity", "fidelity_inequality", "tensor_power")}
    for _ in range(trials):
        r, s, x = (_random_state(n_qubits, rng) for _ in range(3))
        margins["triangle"].append(trace_distance(r, s) + trace_distance(s, x) - trace_distance(r, x))
        f, t = fidelity(r, s), trace_distance(r, s)
        margins["fuchs_van_de_graaf"].append(min(t - (1 - f), np.sqrt(max(0.0, 1 - f * f)) - t))
        a, b = _random_state(2, rng), _random_state(2, rng)
        fa = fidelity(ptrace_kron(a, [2, 2], [0]), ptrace_kron(b, [2, 2], [0]))
        margins["fidelity_monotonicity"].append(fa - fidelity(a, b))
        margins["fidelity_inequality"].append(1 + fidelity(r, x) - fidelity(r, s) ** 2 - fidelity(s, x) ** 2)
        p, q = _random_state(1, rng), _random_state(1, rng)
        eps = trace_distance(p, q)
        l = int(rng.integers(1, 7))
        tl = trace_distance(kron_all([p] * l), kron_all([q] * l))
        margins["tensor_power"].append(min(tl - (1 - np.exp(-l * eps * eps)), l * eps - tl))
    return [
        PropertyCheck(k, trials, int(sum(m < -tol for m in v)), float(min(v)) if v else 0.0)
        for k, v in margins.items()
    ]
