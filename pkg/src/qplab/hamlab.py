"""Hamiltonians with an unknown-state coupling and the unary-clock reduction."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .circuit import GateCircuit
from .qcore import (
    SCHEMA,
    DimensionError,
    as_matrix,
    as_vector,
    decode_complex,
    embed,
    encode_matrix,
    is_bounded_psd,
    is_pure_input,
)

P0 = np.diag([1.0, 0.0]).astype(np.complex128)
P1 = np.diag([0.0, 1.0]).astype(np.complex128)


@dataclass(frozen=True)
class LocalTerm:
    """Operator ``0 ⪯ M ⪯ I`` on a sorted list of qubits."""

    qubits: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        q = tuple(int(x) for x in self.qubits)
        m = np.asarray(self.matrix, dtype=np.complex128)
        if list(q) != sorted(set(q)):
            raise ValueError("term qubits must be sorted and distinct")
        if m.shape != (1 << len(q), 1 << len(q)):
            raise DimensionError("term matrix does not match its qubits")
        if not is_bounded_psd(m):
            raise ValueError("term violates 0 ⪯ M ⪯ I")
        object.__setattr__(self, "qubits", q)
        object.__setattr__(self, "matrix", (m + m.conj().T) / 2)

    @property
    def locality(self) -> int:
        return len(self.qubits)


def make_term(qubits: Sequence[int], matrix: np.ndarray) -> LocalTerm:
    """Build a term from an unsorted qubit list (local qubit j = qubits[j])."""
    qubits = [int(q) for q in qubits]
    order = sorted(qubits)
    pos = [order.index(q) for q in qubits]
    return LocalTerm(tuple(order), embed(matrix, pos, len(qubits)))


@dataclass
class HamiltonianInstance:
    """Plain terms ``H_s`` and coupled terms ``H_ℓ`` with thresholds.

    The assembled operator is ``Σ_s H_s − Σ_ℓ |ψ⟩⟨ψ|_I ⊗ H_ℓ``; the input
    register is the half-open qubit range ``[lo, hi)``.
    """

    n_total_qubits: int
    plain_terms: list[LocalTerm]
    coupled_terms: list[LocalTerm]
    input_register: tuple[int, int]
    p: int
    a: float
    b: float
    variant: str = "pure"
    meta: dict = field(default_factory=dict)

    @property
    def input_qubits(self) -> list[int]:
        lo, hi = self.input_register
        return list(range(lo, hi))

    def term_count(self) -> int:
        """``|S|+|L|`` (pure) or ``|S| + 2^k|L|`` (mixed)."""
        if self.variant == "mixed":
            return len(self.plain_terms) + sum(1 << t.locality for t in self.coupled_terms)
        return len(self.plain_terms) + len(self.coupled_terms)

    def promise_violations(self) -> list[str]:
        out = []
        if self.term_count() > self.p:
            out.append(f"term count {self.term_count()} exceeds p={self.p}")
        gap = 4.0 if self.variant == "mixed" else 2.0
        if not self.b - self.a > gap / self.p:
            out.append(f"b - a = {self.b - self.a:.6g} is not above {gap}/p")
        inp = set(self.input_qubits)
        for t in self.coupled_terms:
            if inp & set(t.qubits):
                out.append("a coupled term touches the input register")
        return out

    def to_dict(self) -> dict:
        def enc(ts):
            return [{"qubits": list(t.qubits), "matrix": encode_matrix(t.matrix)} for t in ts]

        return {
            "version": SCHEMA,
            "n_qubits": self.n_total_qubits,
            "input_register": list(self.input_register),
            "plain_terms": enc(self.plain_terms),
            "coupled_terms": enc(self.coupled_terms),
            "p": self.p,
            "a": self.a,
            "b": self.b,
            "variant": self.variant,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "HamiltonianInstance":
        if data.get("version") != SCHEMA:
            raise ValueError(f"schema version mismatch: {data.get('version')!r}")

        def dec(ts):
            return [LocalTerm(tuple(t["qubits"]), decode_complex(t["matrix"])) for t in ts]

        return cls(
            n_total_qubits=int(data["n_qubits"]),
            plain_terms=dec(data["plain_terms"]),
            coupled_terms=dec(data["coupled_terms"]),
            input_register=tuple(data["input_register"]),
            p=int(data["p"]),
            a=float(data["a"]),
            b=float(data["b"]),
            variant=data.get("variant", "pure"),
        )

    @classmethod
    def from_json(cls, text: str) -> "HamiltonianInstance":
        return cls.from_dict(json.loads(text))


def coupled_operator(instance: HamiltonianInstance, term: LocalTerm, psi) -> np.ndarray:
    """Full matrix of ``ψ_I ⊗ H_ℓ``; ``psi`` may be a vector or a density matrix."""
    if is_pure_input(psi):
        v = as_vector(psi)
        rho = np.outer(v, v.conj())
    else:
        rho = as_matrix(psi)
    qi = instance.input_qubits
    if rho.shape[0] != 1 << len(qi):
        raise DimensionError("psi does not match the input register")
    local = np.kron(term.matrix, rho)
    return embed(local, qi + list(term.qubits), instance.n_total_qubits)


def plain_operator(instance: HamiltonianInstance) -> np.ndarray:
    d = 1 << instance.n_total_qubits
    h = np.zeros((d, d), dtype=np.complex128)
    for t in instance.plain_terms:
        h += embed(t.matrix, t.qubits, instance.n_total_qubits)
    return h


def assemble(instance: HamiltonianInstance, psi) -> np.ndarray:
    """``Σ_s H_s − Σ_ℓ |ψ⟩⟨ψ|_I ⊗ H_ℓ`` as a dense matrix."""
    h = plain_operator(instance)
    for t in instance.coupled_terms:
        h -= coupled_operator(instance, t, psi)
    return h


def energy(instance: HamiltonianInstance, psi, eta) -> float:
    v = as_vector(eta)
    return float(np.vdot(v, assemble(instance, psi) @ v).real)


# ---------------------------------------------------------------- clock layout

@dataclass(frozen=True)
class ClockLayout:
    """Register map for the unary-clock reduction.

    Work qubits come first (input ``I``, witness ``W``, ancilla ``A``); the
    ``m + 1`` clock qubits ``T_1 … T_{m+1}`` follow.
    """

    n_input: int
    n_witness: int
    n_ancilla: int
    m: int
    answer_qubit: int

    @property
    def n_work(self) -> int:
        return self.n_input + self.n_witness + self.n_ancilla

    @property
    def n_total(self) -> int:
        return self.n_work + self.m + 1

    def clock_qubit(self, i: int) -> int:
        """Index of ``T_i`` (1-based)."""
        return self.n_work + i - 1

    def clock_qubits(self) -> list[int]:
        return [self.clock_qubit(i) for i in range(1, self.m + 2)]

    @property
    def witness_qubits(self) -> list[int]:
        return list(range(self.n_input, self.n_input + self.n_witness))

    @property
    def ancilla_qubits(self) -> list[int]:
        return list(range(self.n_input + self.n_witness, self.n_work))


def clock_vector(t: int, m: int) -> np.ndarray:
    """``|1^t 0^{m+1-t}⟩`` with ``T_1`` as the lowest clock bit."""
    v = np.zeros(1 << (m + 1), dtype=np.complex128)
    v[(1 << t) - 1] = 1.0
    return v


def _prop_clock_ops(t: int) -> tuple[list[int], int, int]:
    """Clock positions touched by transition ``t → t+1`` and the two patterns."""
    if t == 0:
        return [1, 2], 0b00, 0b01  # (T1,T2): 00 -> 10
    return [t, t + 1, t + 2], 0b001, 0b011  # (T_t,T_t+1,T_t+2): 100 -> 110


def cook_levin(
    verifier: GateCircuit,
    n_input: int,
    n_witness: int,
    n: int,
    answer_qubit: int | None = None,
    stab_weight: int = 1,
    b: float | None = None,
    p: int | None = None,
    variant: str = "pure",
) -> HamiltonianInstance:
    """Unary-clock Hamiltonian for ``verifier`` with every term halved.

    The verifier acts on ``n_input`` input qubits, ``n_witness`` witness
    qubits and the remaining ancilla qubits; ``n`` sets the completeness
    parameter so that ``a = 1/(2^{n+1}(m+1))``. Terms:

    * input check: plain ``|0⟩⟨0|_{T1}`` and coupled ``|0⟩⟨0|_{T1}``
      (together ``(I − |ψ⟩⟨ψ|)_I ⊗ |0⟩⟨0|_{T1}``), plus ``|1⟩⟨1|_{A_i}|0⟩⟨0|_{T1}``;
    * output check ``|0⟩⟨0|_{ans} ⊗ |1⟩⟨1|_{T_m}``;
    * one propagation term per gate using ``V_{t+1}``;
    * clock checks ``|0⟩⟨0|_{T_i}|1⟩⟨1|_{T_{i+1}}`` for ``i < m`` and ``|1⟩⟨1|_{T_{m+1}}``,
      each repeated ``stab_weight`` times.

    ``b`` defaults to 0 (unknown); pass the exact λ_min of a no-instance.
    """
    m = len(verifier)
    if m < 1:
        raise ValueError("the reduction needs at least one gate")
    nv = verifier.n_qubits
    n_anc = nv - n_input - n_witness
    if n_anc < 1:
        raise ValueError("the verifier needs an answer qubit in its ancilla register")
    ans = nv - 1 if answer_qubit is None else int(answer_qubit)
    lay = ClockLayout(n_input, n_witness, n_anc, m, ans)
    if lay.n_total > 12:
        raise DimensionError("reduction exceeds the 12-qubit cap")
    T = lay.clock_qubit
    half = 0.5
    plain: list[LocalTerm] = []
    roles: list[str] = []
    coupled: list[LocalTerm] = []

    plain.append(LocalTerm((T(1),), half * P0))
    roles.append("in")
    coupled.append(LocalTerm((T(1),), half * P0))
    for q in lay.ancilla_qubits:
        plain.append(make_term([q, T(1)], half * np.kron(P0, P1)))
        roles.append("in")
    plain.append(make_term([ans, T(m)], half * np.kron(P1, P0)))
    roles.append("out")

    for t in range(m):
        g = verifier.gates[t]
        v = g.matrix()
        dg = v.shape[0]
        pos, before, after = _prop_clock_ops(t)
        dc = 1 << len(pos)
        kb = np.zeros((dc, dc), dtype=np.complex128)
        kb[before, before] = 1
        ka = np.zeros((dc, dc), dtype=np.complex128)
        ka[after, after] = 1
        up = np.zeros((dc, dc), dtype=np.complex128)
        up[after, before] = 1
        local = np.kron(kb + ka, np.eye(dg)) - np.kron(up, v) - np.kron(up.T, v.conj().T)
        plain.append(make_term(list(g.qubits) + [T(i) for i in pos], half * local))
        roles.append("prop")

    for _ in range(stab_weight):
        for i in range(1, m):
            plain.append(make_term([T(i), T(i + 1)], half * np.kron(P1, P0)))
            roles.append("stab")
        plain.append(LocalTerm((T(m + 1),), half * P1))
        roles.append("stab")

    a = 1.0 / (2 ** (n + 1) * (m + 1))
    inst = HamiltonianInstance(
        n_total_qubits=lay.n_total,
        plain_terms=plain,
        coupled_terms=coupled,
        input_register=(0, n_input),
        p=1,
        a=a,
        b=0.0 if b is None else float(b),
        variant=variant,
        meta={"layout": lay, "verifier": verifier, "n": n, "roles": roles},
    )
    inst.p = p if p is not None else choose_p(inst)
    return inst


def choose_p(instance: HamiltonianInstance) -> int:
    """Smallest ``p ≥ term count`` with ``b − a > gap/p`` (gap 2 pure, 4 mixed)."""
    k = instance.term_count()
    gap = 4.0 if instance.variant == "mixed" else 2.0
    diff = instance.b - instance.a
    if diff <= 0:
        return k
    return max(k, math.floor(gap / diff) + 1)


def with_threshold_b(instance: HamiltonianInstance, b: float) -> HamiltonianInstance:
    inst = HamiltonianInstance(
        instance.n_total_qubits,
        list(instance.plain_terms),
        list(instance.coupled_terms),
        instance.input_register,
        1,
        instance.a,
        float(b),
        instance.variant,
        dict(instance.meta),
    )
    inst.p = choose_p(inst)
    return inst


def history_isometry(verifier: GateCircuit, m: int | None = None) -> np.ndarray:
    """Matrix taking a work state to its clock-indexed history state."""
    m = len(verifier) if m is None else m
    dw = 1 << verifier.n_qubits
    out = np.zeros((dw << (m + 1), dw), dtype=np.complex128)
    u = np.eye(dw, dtype=np.complex128)
    for t in range(m + 1):
        if t > 0:
            u = verifier.gate_unitary(t - 1) @ u
        out += np.kron(clock_vector(t, m)[:, None], u)
    return out / np.sqrt(m + 1)


def work_state(verifier: GateCircuit, psi, phi, n_input: int, n_witness: int) -> np.ndarray:
    """``|ψ⟩_I |φ⟩_W |0⟩_A`` on the verifier register."""
    vpsi, vphi = as_vector(psi), as_vector(phi)
    if vpsi.shape[0] != 1 << n_input or vphi.shape[0] != 1 << n_witness:
        raise DimensionError("input or witness size mismatch")
    n_anc = verifier.n_qubits - n_input - n_witness
    zero = np.zeros(1 << n_anc, dtype=np.complex128)
    zero[0] = 1
    return np.kron(zero, np.kron(vphi, vpsi))


def history_state(verifier: GateCircuit, psi, phi, n_input: int, n_witness: int) -> np.ndarray:
    """``(m+1)^{-½} Σ_t V_t⋯V_1 |ψ,φ,0⟩ ⊗ |1^t 0^{m+1-t}⟩``; ``m = 0`` is allowed."""
    w = work_state(verifier, psi, phi, n_input, n_witness)
    m = len(verifier)
    out = np.zeros(len(w) << (m + 1), dtype=np.complex128)
    cur = w
    for t in range(m + 1):
        if t > 0:
            cur = GateCircuit(verifier.n_qubits, [verifier.gates[t - 1]]).apply(cur)
        out += np.kron(clock_vector(t, m), cur)
    return out / np.sqrt(m + 1)


def legal_clock_isometry(layout: ClockLayout) -> np.ndarray:
    """Embedding of work ⊗ span{legal clock states} into the full register."""
    dw = 1 << layout.n_work
    cols = [np.kron(clock_vector(t, layout.m)[:, None], np.eye(dw)) for t in range(layout.m + 1)]
    return np.hstack(cols)


# ---------------------------------------------------------------- geometry

def null_space_basis(h: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return v[:, np.abs(w) <= tol]


def min_nonzero_eigenvalue(h: np.ndarray, tol: float = 1e-9) -> float:
    w = np.linalg.eigvalsh((h + h.conj().T) / 2)
    nz = w[w > tol]
    return float(nz.min()) if nz.size else math.inf


def subspace_angle(x: np.ndarray, y: np.ndarray) -> float:
    """Smallest principal angle between ``span(x)`` and ``span(y)``."""
    if x.shape[1] == 0 or y.shape[1] == 0:
        raise ValueError("zero-dimensional subspace")
    qx, _ = np.linalg.qr(x)
    qy, _ = np.linalg.qr(y)
    s = np.linalg.svd(qx.conj().T @ qy, compute_uv=False)
    return float(np.arccos(np.clip(s.max(), -1.0, 1.0)))


@dataclass(frozen=True)
class GeometricBounds:
    angle: float
    v: float
    lower_bound: float
    exact_min: float
    projector_upper: float
    projector_max: float

    @property
    def holds(self) -> bool:
        return self.lower_bound <= self.exact_min + 1e-9 and self.projector_max <= self.projector_upper + 1e-9


def geometric_bounds(h1: np.ndarray, h2: np.ndarray, v: float | None = None) -> GeometricBounds:
    """Check ``λ_min(H1+H2) ≥ 2v·sin²(θ/2)`` and ``λ_max(Π_X+Π_Y) ≤ 1+cosθ``.

    ``θ`` is the angle between the null spaces ``X`` of ``H1`` and ``Y`` of
    ``H2``; ``v`` defaults to the smaller of their least nonzero eigenvalues.
    """
    x = null_space_basis(h1)
    y = null_space_basis(h2)
    theta = subspace_angle(x, y)
    if v is None:
        v = min(min_nonzero_eigenvalue(h1), min_nonzero_eigenvalue(h2))
    px = x @ x.conj().T
    py = y @ y.conj().T
    return GeometricBounds(
        angle=theta,
        v=float(v),
        lower_bound=2 * v * math.sin(theta / 2) ** 2,
        exact_min=float(np.linalg.eigvalsh(h1 + h2)[0]),
        projector_upper=1 + math.cos(theta),
        projector_max=float(np.linalg.eigvalsh(px + py)[-1]),
    )


def clock_block_operators(instance: HamiltonianInstance, psi) -> tuple[np.ndarray, np.ndarray]:
    """Input/output part and propagation part restricted to legal clock states."""
    lay: ClockLayout = instance.meta["layout"]
    iso = legal_clock_isometry(lay)
    n = instance.n_total_qubits
    roles = instance.meta["roles"]
    d = 1 << n
    h_io = np.zeros((d, d), dtype=np.complex128)
    h_prop = np.zeros((d, d), dtype=np.complex128)
    for t, role in zip(instance.plain_terms, roles):
        if role == "prop":
            h_prop += embed(t.matrix, t.qubits, n)
        elif role in ("in", "out"):
            h_io += embed(t.matrix, t.qubits, n)
    for t in instance.coupled_terms:
        h_io -= coupled_operator(instance, t, psi)
    return iso.conj().T @ h_io @ iso, iso.conj().T @ h_prop @ iso


# ---------------------------------------------------------------- mixed inputs

def ordered_eigendecomposition(rho, tol: float = 1e-12) -> list[tuple[float, np.ndarray]]:
    """Eigen-ensemble of ``ρ`` sorted by descending weight, ties broken lexicographically."""
    m = as_matrix(rho)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    items = []
    for i in range(len(w)):
        if w[i] <= tol:
            continue
        vec = v[:, i]
        k = int(np.argmax(np.abs(vec) > 1e-9))
        vec = vec * (abs(vec[k]) / vec[k])
        items.append((float(w[i]), vec))
    key = lambda it: (-round(it[0], 10), tuple(np.round(np.concatenate([it[1].real, it[1].imag]), 10)))
    items.sort(key=key)
    return items


WitnessBuilder = Callable[[np.ndarray], np.ndarray]


def lhwm_expected_energy(
    instance: HamiltonianInstance,
    rho,
    witness_builder: WitnessBuilder,
    ensemble: Sequence[tuple[float, np.ndarray]] | None = None,
) -> float:
    """``E_{ψ←D} ⟨η_ψ|H_ψ|η_ψ⟩`` over an eigen-ensemble (or a supplied one)."""
    ens = ordered_eigendecomposition(rho) if ensemble is None else ensemble
    total = 0.0
    for p, psi in ens:
        eta = witness_builder(psi)
        total += p * energy(instance, psi, eta)
    return float(total)


def coupled_sector_amplitudes(
    instance: HamiltonianInstance,
    witness_builder: WitnessBuilder,
    states: Sequence[np.ndarray],
    work_reference: Callable[[np.ndarray], np.ndarray],
) -> np.ndarray:
    """Per-state amplitude ``α`` of the reference branch in each nonzero ``H_ℓ`` sector.

    For each ``ψ`` and each coupled eigenvector ``v_r`` with ``λ_r ≠ 0`` this is
    ``Re⟨ref_ψ ⊗ v_r | (I ⊗ |v_r⟩⟨v_r|) η_ψ⟩`` where ``ref_ψ`` is the
    unmodified input/witness/zero state; uniform initialization asks that it
    does not depend on ``ψ``. Rows are states, columns are sectors.
    """
    rows = []
    for psi in states:
        eta = witness_builder(psi)
        ref = work_reference(psi)
        row = []
        for term in instance.coupled_terms:
            w, v = np.linalg.eigh(term.matrix)
            for r in range(len(w)):
                if abs(w[r]) <= 1e-12:
                    continue
                target = _place(ref, v[:, r], term.qubits, instance.n_total_qubits)
                row.append(float(np.vdot(target, eta).real))
        rows.append(row)
    return np.array(rows)


def _place(ref: np.ndarray, vr: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Overwrite ``qubits`` of the basis-zero reference with ``vr``."""
    k = len(qubits)
    from .qprim import split_register

    m = split_register(ref, list(qubits), n)
    rest = m[0]
    t = np.outer(vr, rest).reshape([2] * n)
    sel = [n - 1 - qubits[k - 1 - i] for i in range(k)]
    others = [ax for ax in range(n) if ax not in sel]
    perm = np.argsort(sel + others)
    return np.transpose(t, perm).reshape(-1)


def uniform_initialization_holds(alphas: np.ndarray, tol: float = 1e-8) -> bool:
    return bool(np.all(np.abs(alphas - alphas[0:1]) <= tol))


# ---------------------------------------------------------------- generators

def random_clock_verifier(n_input: int, m: int, seed, accepting: bool) -> GateCircuit:
    """Verifier on input, one witness qubit, one ancilla and the answer qubit.

    The first ``m − 1`` gates are random H/T/CNOT gates off the answer qubit.
    The last gate is X on the answer (always accepts) or a T gate off the
    answer (always rejects).
    """
    from ._rng import make_rng

    rng = make_rng(seed)
    nv = n_input + 3
    ans = nv - 1
    c = GateCircuit(nv)
    for _ in range(m - 1):
        kind = int(rng.integers(0, 3))
        qs = [int(q) for q in rng.permutation(ans)]
        if kind == 0:
            c.add("H", qs[0])
        elif kind == 1:
            c.add("T", qs[0])
        else:
            c.add("CNOT", qs[0], qs[1])
    if accepting:
        c.add("X", ans)
    else:
        c.add("T", int(rng.integers(0, ans)))
    return c


def exact_min_energy(instance: HamiltonianInstance, psi) -> float:
    return float(np.linalg.eigvalsh(assemble(instance, psi))[0])


def clock_instance_pair(n_input: int, m: int, seed, n: int | None = None, variant: str = "pure", psi=None):
    """Yes/no clock instances sharing ``(a, b, p)``.

    ``b`` is the exact λ_min of the rejecting instance (rounded down at 1e-12)
    and ``p`` the smallest admissible value. Returns ``(yes, no, psi)``.
    """
    from ._rng import make_rng
    from .qcore import haar_vector

    rng = make_rng(seed)
    n = n_input if n is None else n
    if psi is None:
        psi = haar_vector(1 << n_input, rng)
    acc = random_clock_verifier(n_input, m, rng, accepting=True)
    rej = random_clock_verifier(n_input, m, rng, accepting=False)
    no = cook_levin(rej, n_input, 1, n, variant=variant)
    b = math.floor(exact_min_energy(no, psi) * 1e12) / 1e12
    no = with_threshold_b(no, b)
    yes = cook_levin(acc, n_input, 1, n, b=b, p=no.p, variant=variant)
    return yes, no, psi
