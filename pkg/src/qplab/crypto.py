"""Desk-scale cryptographic games.

Toy pseudorandom states and one-way state generators with oracle-assisted
breaks, and the EPR-based auxiliary-input commitment with exact hiding and
binding values. Computational hardness is not modelled; the "hard" unitary
is a seeded Haar sample.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._rng import SeedLike, make_rng
from .circuit import GateCircuit
from .qcore import (
    SCHEMA,
    DimensionError,
    MAX_QUBITS,
    as_vector,
    haar_unitary,
    haar_vector,
    ptrace_kron,
    trace_distance,
)
from .verify import exact_prefix_oracle, sampled_prefix_oracle, search_to_decision

PRS_THRESHOLD = 0.7

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
_S = np.diag([1, 1j]).astype(np.complex128)


# ================================================================ PRS / OWSG

@dataclass
class PrsScheme:
    """Keyed states ``C · ⊗_j S^{k_j} H |0⟩`` with a fixed mixing circuit ``C``.

    Key bit ``j`` sets qubit ``j`` to ``|+⟩`` or ``|+i⟩``, so keys at Hamming
    distance ``d`` have squared overlap ``2^{−d}``.
    """

    key_bits: int
    mixer: GateCircuit
    seed: int | None = None

    @property
    def n_qubits(self) -> int:
        return self.mixer.n_qubits

    @property
    def n_keys(self) -> int:
        return 1 << self.key_bits

    def state(self, key: int) -> np.ndarray:
        if not 0 <= key < self.n_keys:
            raise ValueError("key out of range")
        one = [(_S if (key >> j) & 1 else np.eye(2)) @ _H[:, 0] for j in range(self.key_bits)]
        v = np.ones(1, dtype=np.complex128)
        for j in range(self.n_qubits):
            q = one[j] if j < self.key_bits else np.array([1, 0], dtype=np.complex128)
            v = np.kron(q, v)
        return self.mixer.apply(v)

    def all_states(self) -> np.ndarray:
        return np.stack([self.state(k) for k in range(self.n_keys)])

    def to_dict(self) -> dict:
        return {"version": SCHEMA, "kind": "prs", "key_bits": self.key_bits, "seed": self.seed, "mixer": self.mixer.to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "PrsScheme":
        if data.get("version") != SCHEMA:
            raise ValueError(f"schema version mismatch: {data.get('version')!r}")
        return cls(int(data["key_bits"]), GateCircuit.from_dict(data["mixer"]), data.get("seed"))


def make_prs_scheme(key_bits: int, seed: int, n_qubits: int | None = None, depth: int = 6) -> PrsScheme:
    n = key_bits if n_qubits is None else n_qubits
    if n < key_bits or n > MAX_QUBITS:
        raise DimensionError("state size must cover the key and stay within the cap")
    rng = make_rng(seed)
    mixer = GateCircuit(n)
    for _ in range(depth):
        for q in range(n):
            mixer.add("U", q, matrix=haar_unitary(2, rng))
        for q in range(0, n - 1, 2):
            mixer.add("CNOT", q, q + 1)
        for q in range(1, n - 1, 2):
            mixer.add("CNOT", q, q + 1)
    return PrsScheme(key_bits, mixer, seed)


def max_key_overlap(scheme: PrsScheme, psi, states: np.ndarray | None = None) -> tuple[int, float]:
    """Best key and its squared overlap with ``psi`` (exhaustive search)."""
    states = scheme.all_states() if states is None else states
    ov = np.abs(states.conj() @ as_vector(psi)) ** 2
    k = int(np.argmax(ov))
    return k, float(ov[k])


def prs_oracle(scheme: PrsScheme, psi, rng: np.random.Generator, states: np.ndarray | None = None) -> bool:
    """Membership in the keyed-state language.

    Yes when ``psi`` is a scheme state, no when every squared overlap is at
    most 0.7. In between, a swap test against the best key decides.
    """
    k, ov = max_key_overlap(scheme, psi, states)
    if ov >= 1 - 1e-9:
        return True
    if ov <= PRS_THRESHOLD:
        return False
    return bool(rng.random() < 0.5 + 0.5 * ov)


@dataclass(frozen=True)
class BreakResult:
    advantage: float
    trials: int
    rows: tuple[tuple[int, str, bool, float], ...]  # (trial seed index, case, verdict, running advantage)


def prs_oracle_break(scheme: PrsScheme, trials: int, seed: SeedLike) -> BreakResult:
    """Distinguish keyed states from Haar states with one oracle query per trial."""
    rng = make_rng(seed)
    states = scheme.all_states()
    dim = 1 << scheme.n_qubits
    hits = {"prs": 0, "haar": 0}
    counts = {"prs": 0, "haar": 0}
    rows = []
    for i in range(trials):
        case = "prs" if rng.integers(0, 2) == 0 else "haar"
        psi = states[int(rng.integers(0, scheme.n_keys))] if case == "prs" else haar_vector(dim, rng)
        verdict = prs_oracle(scheme, psi, rng, states)
        counts[case] += 1
        hits[case] += int(verdict)
        adv = _rate(hits["prs"], counts["prs"]) - _rate(hits["haar"], counts["haar"])
        rows.append((i, case, verdict, adv))
    return BreakResult(rows[-1][3] if rows else 0.0, trials, tuple(rows))


def _rate(h: int, c: int) -> float:
    return h / c if c else 0.0


def swap_verifier_table(scheme: PrsScheme, psi, states: np.ndarray | None = None) -> np.ndarray:
    """Swap-test acceptance ``½ + ½|⟨φ_k|ψ⟩|²`` for every candidate key."""
    states = scheme.all_states() if states is None else states
    return 0.5 + 0.5 * np.abs(states.conj() @ as_vector(psi)) ** 2


def _key_to_string(key: int, bits: int) -> str:
    return format(key, f"0{bits}b")


@dataclass(frozen=True)
class OwsgResult:
    key: int
    true_key: int
    acceptance: float
    success: bool


def owsg_break(
    scheme: PrsScheme,
    key: int,
    seed: SeedLike,
    eps: float = 1 / 3,
    shots: int | None = 200,
) -> OwsgResult:
    """Recover a key bit by bit through the prefix oracle over swap-test acceptance.

    Key strings are written most significant bit first. With ``shots`` the
    oracle estimates acceptance by sampling; ``None`` uses exact values.
    Success means the swap-test verifier accepts the guess with probability
    at least ``1 − eps``.
    """
    rng = make_rng(seed)
    n = scheme.key_bits
    psi = scheme.state(key)
    table = swap_verifier_table(scheme, psi)
    oracle = exact_prefix_oracle(table, n, 1.0, eps, rng) if shots is None else sampled_prefix_oracle(table, n, 1.0, eps, shots, rng)
    res = search_to_decision(table, 1.0, eps, oracle)
    guess = int(res.witness, 2)
    acc = float(table[guess])
    return OwsgResult(guess, key, acc, acc >= 1 - eps - 1e-12)


# ================================================================ commitment

def epr(n_qubits: int) -> np.ndarray:
    d = 1 << n_qubits
    return np.eye(d, dtype=np.complex128).reshape(-1) / np.sqrt(d)


def half_state(n_qubits: int, t1: np.ndarray | None = None, t2: np.ndarray | None = None) -> np.ndarray:
    """``(T1⊗T2) Σ_{i} |i‖0⟩|i‖0⟩ / √2^{λ−1}``: maximally entangled on half the space."""
    d = 1 << n_qubits
    m = np.zeros((d, d), dtype=np.complex128)
    for i in range(0, d, 2):
        m[i, i] = 1.0
    m /= np.sqrt(d // 2)
    if t1 is not None:
        m = t1 @ m
    if t2 is not None:
        m = m @ t2.T
    return m.reshape(-1)


def r_only_epr_fidelity_sq(state: np.ndarray, n_qubits: int) -> float:
    """``max_U |⟨EPR|(I⊗U)|state⟩|² = F(Tr_R state, I/d)²``."""
    d = 1 << n_qubits
    m = np.asarray(state).reshape(d, d)
    sv = np.linalg.svd(m, compute_uv=False)
    return float(np.sum(sv) ** 2 / d)


@dataclass
class CommitmentSession:
    """``k`` copies of ``C_jR_j`` pairs, each register ``λ`` qubits.

    Commit 0 prepares ``EPR`` on each pair; commit 1 prepares the auxiliary
    state ``ψ = (I⊗T)EPR``. Reveal 0 projects every pair onto ``EPR``;
    reveal 1 swap-tests every pair against a fresh ``ψ``.
    """

    lam: int
    k: int
    T: np.ndarray
    phase: str = "setup"
    bit: int | None = None
    state: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        d = 1 << self.lam
        if self.T.shape != (d, d):
            raise DimensionError("T must act on one λ-qubit register")
        if 2 * self.lam * self.k > MAX_QUBITS:
            raise DimensionError("commitment registers exceed the qubit cap")

    @property
    def d(self) -> int:
        return 1 << self.lam

    @property
    def aux(self) -> np.ndarray:
        return (np.eye(self.d).reshape(self.d, self.d) @ self.T.T).reshape(-1) / np.sqrt(self.d)

    def pair_state(self, b: int) -> np.ndarray:
        return epr(self.lam) if b == 0 else self.aux

    def branch(self, b: int) -> np.ndarray:
        v = np.ones(1, dtype=np.complex128)
        for _ in range(self.k):
            v = np.kron(v, self.pair_state(b))
        return v

    def commit(self, b: int) -> np.ndarray:
        if self.phase != "setup":
            raise RuntimeError("commit is only allowed in the setup phase")
        self.bit = int(b)
        self.state = self.branch(self.bit)
        self.phase = "committed"
        return self.state

    def reveal(self, b: int, registers: np.ndarray | None = None) -> float:
        """Acceptance probability of opening to ``b`` with the given ``CR`` state."""
        if self.phase != "committed":
            raise RuntimeError("reveal requires a committed session")
        state = self.state if registers is None else as_vector(registers)
        self.phase = "revealed"
        if b == 0:
            return float(abs(np.vdot(self.branch(0), state)) ** 2)
        return swap_product_acceptance(state, self.aux, self.k)


def new_session(lam: int, k: int, seed: SeedLike) -> CommitmentSession:
    return CommitmentSession(lam, k, haar_unitary(1 << lam, seed))


def swap_product_acceptance(state: np.ndarray, aux: np.ndarray, k: int, extra_dim: int = 1) -> float:
    """All ``k`` pairwise swap tests against ``aux`` pass.

    ``state`` is laid out as ``k`` pairs followed by an optional extra
    register. Equals ``2^{−k} Σ_T ⟨Φ|⊗_{j∈T} |ψ⟩⟨ψ|_j|Φ⟩``.
    """
    dp = aux.shape[0]
    t = np.asarray(state).reshape([dp] * k + [extra_dim])
    total = 0.0
    for size in range(k + 1):
        for subset in combinations(range(k), size):
            x = t
            for j in subset:
                x = _proj_axis(x, aux, j)
            total +=float(np.vdot(t.reshape(-1), x.reshape(-1)).real)
    return total / (1 << k)


def _proj_axis(x: np.ndarray, v: np.ndarray, axis: int) -> np.ndarray:
    """Apply ``|v⟩⟨v|`` to ``axis`` of tensor ``x``."""
    amp = np.tensordot(v.conj(), x, axes=([0], [axis]))
    return np.moveaxis(np.tensordot(v, amp, axes=0), 0, axis)


def hiding_check(session: CommitmentSession) -> float:
    """Trace distance between the receiver's ``C`` registers in the two branches."""
    d = session.d
    dims = [d, d] * session.k
    keep = [2 * j for j in range(session.k)]
    r0 = ptrace_kron(session.branch(0), dims, keep)
    r1 = ptrace_kron(session.branch(1), dims, keep)
    return trace_distance(r0, r1)


def _apply_rz(session: CommitmentSession, state: np.ndarray, u: np.ndarray, dz: int) -> np.ndarray:
    """Apply ``u`` to ``R_1…R_k ⊗ Z`` of a ``(C_1R_1)…(C_kR_k) Z`` state."""
    d, k = session.d, session.k
    t = np.asarray(state).reshape([d, d] * k + [dz])
    r_axes = [2 * j + 1 for j in range(k)] + [2 * k]
    moved = np.moveaxis(t, r_axes, list(range(len(r_axes))))
    shape = moved.shape
    flat = moved.reshape(d**k * dz, -1)
    if u.shape != (flat.shape[0], flat.shape[0]):
        raise DimensionError("adversary unitary must act on R ⊗ Z")
    out = (u @ flat).reshape(shape)
    return np.moveaxis(out, list(range(len(r_axes))), r_axes).reshape(-1)


@dataclass(frozen=True)
class BindingValues:
    v01: float
    v10: float


def binding_game_values(session: CommitmentSession, u: np.ndarray, eta=None) -> BindingValues:
    """Norms of the two honest-binding games for adversary ``(U, η)``.

    ``v01``: honest commit to 0, ``U`` on ``RZ``, then all swap projectors
    against fresh ``ψ``. ``v10``: honest commit to 1, ``U`` on ``RZ``, then
    the projector onto ``EPR^{⊗k}``.
    """
    veta = np.ones(1, dtype=np.complex128) if eta is None else as_vector(eta)
    dz = veta.shape[0]
    phi0 = _apply_rz(session, np.kron(session.branch(0), veta), u, dz)
    v01 = np.sqrt(max(0.0, swap_product_acceptance(phi0, session.aux, session.k, dz)))
    phi1 = _apply_rz(session, np.kron(session.branch(1), veta), u, dz)
    t = phi1.reshape([session.d**2] * session.k + [dz])
    e = epr(session.lam)
    for _ in range(session.k):
        t = np.tensordot(e.conj(), t, axes=([0], [0]))
    v10 = float(np.linalg.norm(t))
    return BindingValues(float(v01), v10)
