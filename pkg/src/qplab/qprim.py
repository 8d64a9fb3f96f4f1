"""Measurement primitives with exact outcome distributions and samplers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Hashable, Sequence

import numpy as np

from . import kernels
from ._rng import SeedLike, make_rng
from .circuit import GateCircuit
from .qcore import (
    DimensionError,
    apply_operator,
    as_matrix,
    as_vector,
    is_projector,
    is_pure_input,
    trace_distance,
    _n_qubits_of,
)

UNREACHABLE = 1e-12


@dataclass(frozen=True)
class Outcome:
    label: Hashable
    probability: float
    post_state: np.ndarray | None  # density matrix, None when unreachable


@dataclass(frozen=True)
class MeasurementOutcomeDist:
    outcomes: tuple[Outcome, ...]

    def __post_init__(self):
        ps = np.array([o.probability for o in self.outcomes])
        if np.any(ps < -1e-12) or abs(ps.sum() - 1.0) > 1e-10:
            raise ValueError("outcome probabilities must be a distribution")

    def prob(self, label: Hashable) -> float:
        return float(sum(o.probability for o in self.outcomes if o.label == label))

    @property
    def labels(self) -> list:
        return [o.label for o in self.outcomes]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([max(0.0, o.probability) for o in self.outcomes])

    def post(self, label: Hashable) -> np.ndarray | None:
        for o in self.outcomes:
            if o.label == label:
                return o.post_state
        raise KeyError(label)

    def expectation(self, value_of) -> float:
        return float(sum(o.probability * value_of(o.label) for o in self.outcomes))

    def sample(self, seed: SeedLike, shots: int) -> list:
        idx = kernels.sample_categorical(self.probabilities, make_rng(seed).random(shots))
        labels = self.labels
        return [labels[i] for i in idx]


def _make_dist(items: Sequence[tuple[Hashable, float, np.ndarray | None]]) -> MeasurementOutcomeDist:
    out = []
    for label, p, post in items:
        p = float(max(0.0, p))
        out.append(Outcome(label, p, post if p > UNREACHABLE else None))
    return MeasurementOutcomeDist(tuple(out))


def swap_operator(d: int) -> np.ndarray:
    """SWAP on C^d ⊗ C^d."""
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


def swap_test(a, b) -> MeasurementOutcomeDist:
    """Controlled-SWAP test; outcome 0 has probability ½ + ½Tr(ab)."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionError("swap test needs equal dimensions")
    d = ma.shape[0]
    joint = np.kron(ma, mb)
    s = swap_operator(d)
    eye = np.eye(d * d)
    items = []
    for label, k in ((0, (eye + s) / 2), (1, (eye - s) / 2)):
        post = k @ joint @ k.conj().T
        p = float(np.trace(post).real)
        items.append((label, p, post / p if p > UNREACHABLE else None))
    return _make_dist(items)


def swap_accept_probability(a, b) -> float:
    """Closed form ½ + ½Tr(ab) without building the joint register."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionError("swap test needs equal dimensions")
    return 0.5 + 0.5 * float(np.real(np.sum(ma * mb.T)))


def split_register(vec: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """Amplitude matrix with rows indexed by ``qubits`` (local j = qubits[j])."""
    k = len(qubits)
    t = np.asarray(vec).reshape([2] * n_qubits)
    sel = [n_qubits - 1 - qubits[k - 1 - i] for i in range(k)]
    rest = [ax for ax in range(n_qubits) if ax not in sel]
    return np.transpose(t, sel + rest).reshape(1 << k, -1)


def register_probabilities(vec: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """Computational-basis outcome probabilities of ``qubits``."""
    m = split_register(vec, qubits, n_qubits)
    return np.sum(np.abs(m) ** 2, axis=1)


def partial_swap_test(phi, psi, b_qubits: Sequence[int] | None = None) -> MeasurementOutcomeDist:
    """Swap test between part ``B`` of ``phi`` and the whole of ``psi``.

    Accept probability is ``½ + ½‖(⟨ψ|_B ⊗ I)|φ⟩‖²``. By default ``B`` is
    the block of high qubits of ``phi`` (its left Kronecker factor).
    """
    vphi, vpsi = as_vector(phi), as_vector(psi)
    n = _n_qubits_of(vphi.shape[0])
    k = _n_qubits_of(vpsi.shape[0])
    if b_qubits is None:
        b_qubits = list(range(n - k, n))
    b_qubits = list(b_qubits)
    if len(b_qubits) != k or k > n:
        raise DimensionError("register B must match the size of psi")
    # joint register: psi on fresh high qubits n..n+k-1
    joint = np.kron(vpsi, vphi)
    ntot = n + k
    out = joint
    for j, q in enumerate(b_qubits):
        out = apply_operator(out, swap_operator(2), [q, n + j], ntot)
    items = []
    for label, sign in ((0, 1.0), (1, -1.0)):
        v = 0.5 * (joint + sign * out)
        p = float(np.vdot(v, v).real)
        post = np.outer(v, v.conj()) / p if p > UNREACHABLE else None
        items.append((label, p, post))
    return _make_dist(items)


def partial_overlap_weight(phi, psi, b_qubits: Sequence[int] | None = None) -> float:
    """``‖(⟨ψ|_B ⊗ I)|φ⟩‖²``, the |α|² of the accept law."""
    vphi, vpsi = as_vector(phi), as_vector(psi)
    n = _n_qubits_of(vphi.shape[0])
    k = _n_qubits_of(vpsi.shape[0])
    if b_qubits is None:
        b_qubits = list(range(n - k, n))
    m = split_register(vphi, list(b_qubits), n)
    red = vpsi.conj() @ m
    return float(np.vdot(red, red).real)


def hadamard_overlap_test(
    a,
    b,
    e_qubits: Sequence[int] | None = None,
    r: int = 0,
    basis_unitary: np.ndarray | None = None,
) -> MeasurementOutcomeDist:
    """Hadamard test between two branch states with an optional ``E`` readout.

    A control qubit in ``|+⟩`` selects branch 0 (``a`` with ``r`` XOR-ed onto
    ``E``) or branch 1 (``basis_unitary`` applied on ``E`` of ``b``). The control
    is measured in the Hadamard basis and ``E`` in the computational basis,
    so ``Pr[±, e] = ¼‖P_e(a' ± b')‖²``. Labels are ``(sign, e)`` tuples.
    """
    va, vb = as_vector(a), as_vector(b)
    if va.shape != vb.shape:
        raise DimensionError("branch states must live on the same register")
    n = _n_qubits_of(va.shape[0])
    e_qubits = [] if e_qubits is None else list(e_qubits)
    k = len(e_qubits)
    ap = va.copy()
    if k:
        xr = np.zeros((1 << k, 1 << k), dtype=np.complex128)
        for i in range(1 << k):
            xr[i ^ r, i] = 1.0
        ap = apply_operator(ap, xr, e_qubits, n)
    bp = vb if basis_unitary is None or not k else apply_operator(vb, basis_unitary, e_qubits, n)
    items = []
    for sign_label, sign in (("+", 1.0), ("-", -1.0)):
        v = 0.5 * (ap + sign * bp)
        if k:
            m = split_register(v, e_qubits, n)
            probs = np.sum(np.abs(m) ** 2, axis=1)
            for e in range(1 << k):
                items.append(((sign_label, e), float(probs[e]), _project_post(v, e_qubits, e, n, probs[e])))
        else:
            p = float(np.vdot(v, v).real)
            items.append(((sign_label, 0), p, np.outer(v, v.conj()) / p if p > UNREACHABLE else None))
    return _make_dist(items)


def _project_post(v: np.ndarray, qubits: list[int], e: int, n: int, p: float) -> np.ndarray | None:
    if p <= UNREACHABLE:
        return None
    k = len(qubits)
    proj = np.zeros((1 << k, 1 << k), dtype=np.complex128)
    proj[e, e] = 1.0
    w = apply_operator(v, proj, qubits, n)
    return np.outer(w, w.conj()) / p


def overlap_x_distribution(dist: MeasurementOutcomeDist, r: int = 0) -> dict[int, float]:
    """Law of ``X``: ±1 when ``E`` reads ``r``, else 0."""
    px = {-1: 0.0, 0: 0.0, 1: 0.0}
    for o in dist.outcomes:
        sign, e = o.label
        if e != r:
            px[0] += o.probability
        else:
            px[1 if sign == "+" else -1] += o.probability
    return px


@dataclass(frozen=True)
class SequentialResult:
    accept_probability: float
    post_state: np.ndarray | None
    eps: tuple[float, ...]
    union_bound_ok: bool
    disturbance: float
    gentle_bound_ok: bool


def sequential_measure(rho, projectors: Sequence[np.ndarray], tol: float = 1e-12) -> SequentialResult:
    """Apply two-outcome projective tests in order and track the all-accept branch."""
    m = as_matrix(rho)
    eps = []
    for e in projectors:
        e = np.asarray(e, dtype=np.complex128)
        if e.shape != m.shape:
            raise DimensionError("projector dimension mismatch")
        if not is_projector(e):
            raise ValueError("sequential_measure requires projectors")
        eps.append(max(0.0, 1.0 - float(np.trace(e @ m).real)))
    branch = m.copy()
    for e in projectors:
        branch = e @ branch @ e
    p = float(np.trace(branch).real)
    total = float(sum(eps))
    post = branch / p if p > UNREACHABLE else None
    dist = trace_distance(post, m) if post is not None else 1.0
    return SequentialResult(
        accept_probability=p,
        post_state=post,
        eps=tuple(eps),
        union_bound_ok=p >= 1 - 4 * total - tol,
        disturbance=dist,
        gentle_bound_ok=dist <= math.sqrt(total) + 1e-8,
    )


def sample_trajectory(source: Any, seed: SeedLike, shots: int = 1) -> list:
    """Sample outcome labels from a distribution, a ``{label: p}`` map or a circuit.

    A circuit is run on ``|0…0⟩`` and every qubit is read out.
    """
    if isinstance(source, MeasurementOutcomeDist):
        return source.sample(seed, shots)
    if isinstance(source, GateCircuit):
        psi = np.zeros(1 << source.n_qubits, dtype=np.complex128)
        psi[0] = 1.0
        probs = np.abs(source.apply(psi)) ** 2
        idx = kernels.sample_categorical(probs, make_rng(seed).random(shots))
        return [int(i) for i in idx]
    if isinstance(source, dict):
        labels = list(source.keys())
        probs = np.array([source[k] for k in labels], dtype=np.float64)
        idx = kernels.sample_categorical(probs, make_rng(seed).random(shots))
        return [labels[i] for i in idx]
    raise TypeError("unsupported source for sample_trajectory")


def hoeffding_half_width(n: int, delta: float) -> float:
    """Two-sided Hoeffding radius for a mean of ``n`` draws in [0, 1]."""
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def is_pure(x) -> bool:
    return is_pure_input(x)
