"""Verification algorithms: energy estimators, Quantum-OR, amplification,
search-to-decision and state identification.

Exact modes integrate over every measurement outcome analytically; sampled
modes draw the same outcome laws from a seeded stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.stats import binom

from . import kernels
from ._rng import SeedLike, make_rng
from .circuit import GateCircuit
from .hamlab import (
    ClockLayout,
    HamiltonianInstance,
    clock_vector,
    history_isometry,
    ordered_eigendecomposition,
    work_state,
)
from .qcore import (
    SCHEMA,
    DimensionError,
    MAX_QUBITS,
    apply_operator,
    apply_operator_batch,
    as_matrix,
    as_vector,
    decode_complex,
    encode_matrix,
    haar_vector,
    is_bounded_psd,
    is_projector,
    is_pure_input,
    ptrace_kron,
)
from .qprim import hoeffding_half_width, partial_overlap_weight, split_register

CONFIDENCE_DELTA = 1e-3


class PromiseViolation(ValueError):
    """An input lies outside the promise an algorithm relies on."""


@dataclass
class VerdictReport:
    """Outcome of a verifier run; exact and sampled fields are optional."""

    verdict: bool
    p_exact: float | None = None
    p_hat: float | None = None
    trials: int = 0
    half_width: float | None = None
    seed: int | None = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        for v in (self.p_exact, self.p_hat):
            if v is not None and not (-1e-9 <= v <= 1 + 1e-9):
                raise ValueError("probabilities must lie in [0, 1]")

    def to_dict(self) -> dict:
        out: dict = {"verdict": "accept" if self.verdict else "reject"}
        if self.p_exact is not None:
            out["p_exact"] = float(self.p_exact)
        if self.p_hat is not None:
            out["p_hat"] = float(self.p_hat)
        out["trials"] = int(self.trials)
        out["half_width"] = None if self.half_width is None else float(self.half_width)
        out["seed"] = self.seed
        out["stats"] = {k: _plain(v) for k, v in self.stats.items()}
        return out


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _seed_int(seed: SeedLike) -> int | None:
    return int(seed) if isinstance(seed, (int, np.integer)) else None


# ================================================================ Quantum OR

@dataclass
class QorInstance:
    """Projector ``Λ`` on ``A ⊗ B`` with ``A`` the left Kronecker factor.

    ``A`` has ``n`` qubits and ``B`` has ``m``. ``rho`` optionally carries the
    input state on ``A`` that the instance was built for.
    """

    lambda_projector: np.ndarray
    n: int
    m: int
    rho: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.lambda_projector, dtype=np.complex128)
        d = 1 << (self.n + self.m)
        if lam.shape != (d, d):
            raise DimensionError("Λ does not match the A⊗B register")
        if not is_projector(lam):
            raise ValueError("Λ must be a projector")
        self.lambda_projector = (lam + lam.conj().T) / 2
        if self.rho is not None:
            self.rho = as_matrix(self.rho)
            if self.rho.shape != (1 << self.n, 1 << self.n):
                raise DimensionError("input state does not match register A")

    @property
    def N(self) -> int:
        return 1 << self.m

    def to_dict(self) -> dict:
        out = {
            "version": SCHEMA,
            "kind": "qor",
            "n": self.n,
            "m": self.m,
            "lambda": encode_matrix(self.lambda_projector),
        }
        if self.rho is not None:
            out["rho"] = encode_matrix(self.rho)
        for k in ("case", "eta", "delta"):
            if k in self.meta:
                out[k] = self.meta[k]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "QorInstance":
        if data.get("version") != SCHEMA:
            raise ValueError(f"schema version mismatch: {data.get('version')!r}")
        rho = decode_complex(data["rho"]) if "rho" in data else None
        meta = {k: data[k] for k in ("case", "eta", "delta") if k in data}
        return cls(decode_complex(data["lambda"]), int(data["n"]), int(data["m"]), rho, meta)


def best_single_acceptance(rho, inst: QorInstance) -> float:
    """``max_σ Tr(Λ(ρ⊗σ)) = λ_max(Tr_A[Λ(ρ⊗I)])``."""
    dA, dB = 1 << inst.n, inst.N
    op = inst.lambda_projector @ np.kron(as_matrix(rho), np.eye(dB))
    red = ptrace_kron(op, [dA, dB], [1])
    return float(np.linalg.eigvalsh((red + red.conj().T) / 2)[-1])


def _shifted_projectors(inst: QorInstance) -> np.ndarray:
    """Stack of ``Λ_i = (I⊗X_i) Λ (I⊗X_i)`` with ``X_i|b⟩ = |b⊕i⟩``."""
    dA, dB = 1 << inst.n, inst.N
    a = np.repeat(np.arange(dA), dB)
    b = np.tile(np.arange(dB), dA)
    lam = inst.lambda_projector
    out = np.empty((dB, dA * dB, dA * dB), dtype=np.complex128)
    for i in range(dB):
        perm = a * dB + (b ^ i)
        out[i] = lam[np.ix_(perm, perm)]
    return out


def _fourier(N: int) -> np.ndarray:
    k = np.arange(N)
    return np.exp(2j * np.pi * np.outer(k, k) / N) / math.sqrt(N)


def qor_iterations(N: int, eta: float) -> int:
    return math.ceil(N / eta - 1e-12)


def qor_accept_probability(rho, inst: QorInstance, eta: float) -> float:
    """Exact acceptance of the alternating-projection Quantum-OR test.

    Registers are ``A ⊗ B ⊗ C`` starting in ``ρ ⊗ |0⟩⟨0| ⊗ |0⟩⟨0|``. Each of
    the ``⌈N/η⌉`` iterations measures ``{Π, I−Π}`` (``Π`` accepts), then
    ``{Δ, I−Δ}`` with ``Δ = I ⊗ |0⟩⟨0|_C`` (``I−Δ`` accepts). ``Π`` acts as
    ``Λ_i`` on ``AB`` in the ``i``-th Fourier sector of ``C``. Only the
    all-reject branch is tracked; it is linear in ``ρ``.
    """
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    dA, N = 1 << inst.n, inst.N
    if inst.n + 2 * inst.m > MAX_QUBITS:
        raise DimensionError("Quantum-OR registers exceed the qubit cap")
    if is_pure_input(rho):
        ens = [(1.0, as_vector(rho))]
    else:
        ens = ordered_eigendecomposition(rho)
    if not ens:
        return 0.0
    weights = np.array([p for p, _ in ens])
    V = np.zeros((len(ens), dA * N, N), dtype=np.complex128)
    for k, (_, v) in enumerate(ens):
        if v.shape[0] != dA:
            raise DimensionError("input state does not match register A")
        V[k, ::N, 0] = v  # B = |0⟩
    lam_i = _shifted_projectors(inst)
    Q = _fourier(N)
    for _ in range(qor_iterations(N, eta)):
        W = V @ Q.conj()
        PW = np.einsum("ixy,kyi->kxi", lam_i, W)
        V = V - PW @ Q.T
        V[:, :, 1:] = 0.0
    reject = float(np.sum(weights * np.sum(np.abs(V) ** 2, axis=(1, 2))))
    return float(min(1.0, max(0.0, 1.0 - reject)))


def qor_run(
    rho,
    inst: QorInstance,
    eta: float,
    delta: float | None = None,
    seed: SeedLike = None,
    trials: int = 0,
) -> VerdictReport:
    """Exact Quantum-OR acceptance with the yes/no reference bounds.

    With ``trials > 0`` and a seed, also draws that many independent runs.
    The verdict compares against the midpoint of ``η²/7`` and ``4Nδ``.
    """
    if eta < 0.5:
        raise ValueError("the test assumes η ≥ 1/2")
    N = inst.N
    delta = 1.0 / (64 * N) if delta is None else float(delta)
    p = qor_accept_probability(rho, inst, eta)
    yes_bound = eta**2 / 7
    no_bound = 4 * N * delta
    stats = {
        "iterations": qor_iterations(N, eta),
        "yes_bound": yes_bound,
        "no_bound": no_bound,
        "best_single_acceptance": best_single_acceptance(rho, inst),
    }
    report = VerdictReport(verdict=p >= (yes_bound + no_bound) / 2, p_exact=p, stats=stats)
    if trials > 0:
        rng = make_rng(seed)
        hits = int(np.sum(rng.random(trials) < p))
        report.p_hat = hits / trials
        report.trials = trials
        report.half_width = hoeffding_half_width(trials, CONFIDENCE_DELTA)
        report.seed = _seed_int(seed)
    return report


def _orthonormal(cols: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(cols)
    keep = np.abs(np.diag(r)) > 1e-10
    return q[:, keep]


def qor_yes_instance(n: int, m: int, seed: SeedLike, eta: float = 2 / 3, extra_rank: int | None = None) -> QorInstance:
    """Plant ``|a⟩|b⟩`` inside ``Λ`` and give ``ρ`` weight ≥ η on ``|a⟩``."""
    rng = make_rng(seed)
    dA, dB = 1 << n, 1 << m
    a = haar_vector(dA, rng)
    b = haar_vector(dB, rng)
    w = eta + (1 - eta) * rng.random()
    g = rng.normal(size=(dA, dA)) + 1j * rng.normal(size=(dA, dA))
    tau = g @ g.conj().T
    tau /= np.trace(tau).real
    rho = w * np.outer(a, a.conj()) + (1 - w) * tau
    r = int(rng.integers(0, 3)) if extra_rank is None else int(extra_rank)
    cols = [np.kron(a, b)] + [haar_vector(dA * dB, rng) for _ in range(r)]
    basis = _orthonormal(np.stack(cols, axis=1))
    lam = basis @ basis.conj().T
    return QorInstance(lam, n, m, rho, {"case": "yes", "eta": eta})


def qor_no_instance(n: int, m: int, seed: SeedLike, delta: float | None = None) -> QorInstance:
    """``Λ`` nearly orthogonal to ``supp(ρ) ⊗ B`` with best acceptance ≤ δ."""
    if n < 1:
        raise ValueError("the no-instance needs a nontrivial register A")
    rng = make_rng(seed)
    dA, dB = 1 << n, 1 << m
    delta = 1.0 / (64 * dB) if delta is None else float(delta)
    rank = int(rng.integers(1, dA))
    u = np.linalg.qr(rng.normal(size=(dA, dA)) + 1j * rng.normal(size=(dA, dA)))[0]
    sup, comp = u[:, :rank], u[:, rank:]
    p = rng.dirichlet(np.ones(rank))
    rho = (sup * p) @ sup.conj().T
    k = int(rng.integers(1, min(3, comp.shape[1] * dB, rank * dB) + 1))
    c_vecs = np.kron(comp, np.eye(dB)) @ (rng.normal(size=(comp.shape[1] * dB, k)) + 1j * rng.normal(size=(comp.shape[1] * dB, k)))
    s_vecs = np.kron(sup, np.eye(dB)) @ (rng.normal(size=(rank * dB, k)) + 1j * rng.normal(size=(rank * dB, k)))
    c_vecs = _orthonormal(c_vecs)
    s_vecs = _orthonormal(s_vecs)
    theta = 0.3 * rng.random()
    while True:
        basis = _orthonormal(math.cos(theta) * c_vecs + math.sin(theta) * s_vecs)
        inst = QorInstance(basis @ basis.conj().T, n, m, rho, {"case": "no", "delta": delta})
        if best_single_acceptance(rho, inst) <= delta:
            return inst
        theta /= 2


# ---------------------------------------------------------------- QMA -> QOR

@dataclass(frozen=True)
class QorReduction:
    instance: QorInstance
    rounds: int
    completeness_error: float
    soundness_error: float
    completeness_ok: bool
    soundness_ok: bool


def verifier_max_acceptance(verifier: GateCircuit, n_input: int, n_witness: int, psi, answer_qubit: int | None = None) -> float:
    """``max_φ Pr[V accepts |ψ⟩|φ⟩|0⟩]`` by an eigensolve over the witness."""
    nv = verifier.n_qubits
    ans = nv - 1 if answer_qubit is None else answer_qubit
    dw = 1 << n_witness
    cols = np.stack([work_state(verifier, psi, np.eye(dw)[j], n_input, n_witness) for j in range(dw)], axis=1)
    out = np.stack([verifier.apply(cols[:, j]) for j in range(dw)], axis=1)
    mask = ((np.arange(1 << nv) >> ans) & 1).astype(bool)
    acc = out[mask]
    g = acc.conj().T @ acc
    return float(np.linalg.eigvalsh((g + g.conj().T) / 2)[-1])


def qma_to_qor(
    verifier: GateCircuit,
    n_input: int,
    n_witness: int,
    psi,
    rounds: int | None = None,
    answer_qubit: int | None = None,
    declared_error: float | None = None,
) -> QorReduction:
    """Coherent ``rounds``-fold measure-and-rewind turned into a QOR projector.

    Each round has its own input copy, ancillas and a flag qubit, and shares
    the witness register ``B``. A round applies ``V``, copies the answer
    onto its flag and applies ``V†``; ``Λ`` projects onto all flags set.
    The witness sits on the low qubits so ``Λ`` is indexed ``A ⊗ B``.
    """
    nv = verifier.n_qubits
    n_anc = nv - n_input - n_witness
    ans = nv - 1 if answer_qubit is None else answer_qubit
    rounds = n_witness if rounds is None else int(rounds)
    blk = n_input + n_anc + 1
    n_tot = n_witness + rounds * blk
    if n_tot + n_witness > MAX_QUBITS:
        raise DimensionError("reduction exceeds the qubit cap")

    def where(r: int, q: int) -> int:
        base = n_witness + r * blk
        if q < n_input:
            return base + q
        if q < n_input + n_witness:
            return q - n_input
        return base + n_input + (q - n_input - n_witness)

    d = 1 << n_tot
    w_prime = np.eye(d, dtype=np.complex128)
    cnot = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=np.complex128)
    for r in range(rounds):
        for g in verifier.gates:
            w_prime = apply_operator_batch(w_prime, g.matrix(), [where(r, q) for q in g.qubits], n_tot)
        flag = n_witness + r * blk + blk - 1
        w_prime = apply_operator_batch(w_prime, cnot, [where(r, ans), flag], n_tot)
        for g in reversed(verifier.gates):
            w_prime = apply_operator_batch(w_prime, g.matrix().conj().T, [where(r, q) for q in g.qubits], n_tot)
    flags = [n_witness + r * blk + blk - 1 for r in range(rounds)]
    idx = np.arange(d)
    all_set = np.ones(d, dtype=bool)
    for f in flags:
        all_set &= ((idx >> f) & 1).astype(bool)
    lam = w_prime[all_set].conj().T @ w_prime[all_set]

    vpsi = as_vector(psi)
    block = np.zeros(1 << blk, dtype=np.complex128)
    block[: 1 << n_input] = vpsi  # ancillas and flag in |0⟩
    state = np.ones(1, dtype=np.complex128)
    for _ in range(rounds):
        state = np.kron(block, state)
    rho = np.outer(state, state.conj())

    p_max = verifier_max_acceptance(verifier, n_input, n_witness, psi, ans)
    eps_c = 1.0 - p_max if declared_error is None else declared_error
    eps_s = p_max if declared_error is None else declared_error
    inst = QorInstance(lam, n_tot - n_witness, n_witness, rho, {"rounds": rounds})
    return QorReduction(
        instance=inst,
        rounds=rounds,
        completeness_error=eps_c,
        soundness_error=eps_s,
        completeness_ok=1 - 4 * rounds * eps_c > 2 / 3,
        soundness_ok=eps_s**rounds < 2.0 ** (-n_witness) / 64,
    )


# ================================================================ LHwP

def _lattice(values: np.ndarray, max_den: int = 1000) -> int | None:
    den = 1
    for v in values:
        f = Fraction(float(v)).limit_denominator(max_den)
        if abs(float(f) - v) > 1e-9:
            return None
        den = den * f.denominator // math.gcd(den, f.denominator)
        if den > max_den:
            return None
    return den


def _sum_pmf(values: np.ndarray, probs: np.ndarray, rounds: int, den: int) -> tuple[np.ndarray, int]:
    """pmf of the integer sum ``Σ round(den·X)`` over ``rounds`` draws; returns (pmf, offset)."""
    ints = np.rint(values * den).astype(np.int64)
    lo, hi = int(ints.min()), int(ints.max())
    base = np.zeros(hi - lo + 1)
    np.add.at(base, ints - lo, probs)
    out = np.ones(1)
    power = base
    k = rounds
    while k:
        if k & 1:
            out = np.convolve(out, power)
        k >>= 1
        if k:
            power = np.convolve(power, power)
        out = np.clip(out, 0.0, None)
        power = np.clip(power, 0.0, None)
    return out, lo * rounds


def _term_eig(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(matrix)
    return np.where(np.abs(w) < 1e-12, 0.0, w), v


@dataclass(frozen=True)
class RoundLaw:
    """Per-term outcome law of one estimator round."""

    values: np.ndarray
    probs: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.dot(self.values, self.probs))


def lhwp_round_laws(instance: HamiltonianInstance, psi, eta) -> list[RoundLaw]:
    """Laws for each ``x ∈ S ∪ L`` (plain terms first)."""
    n = instance.n_total_qubits
    veta = as_vector(eta)
    vpsi = as_vector(psi)
    if veta.shape[0] != 1 << n:
        raise DimensionError("witness does not match the instance register")
    if vpsi.shape[0] != 1 << len(instance.input_qubits):
        raise DimensionError("input state does not match the input register")
    laws = []
    for t in instance.plain_terms:
        w, v = _term_eig(t.matrix)
        mtx = split_register(veta, t.qubits, n)
        q = np.sum(np.abs(v.conj().T @ mtx) ** 2, axis=1)
        laws.append(RoundLaw(w, q))
    for t in instance.coupled_terms:
        w, v = _term_eig(t.matrix)
        vals, probs = [], []
        for i in range(len(w)):
            proj = np.outer(v[:, i], v[:, i].conj())
            post = apply_operator(veta, proj, t.qubits, n)
            qi = float(np.vdot(post, post).real)
            wi = partial_overlap_weight(post / math.sqrt(qi), vpsi, instance.input_qubits) if qi > 1e-15 else 0.0
            vals += [-w[i], w[i]]
            probs += [qi * (0.5 + 0.5 * wi), qi * (0.5 - 0.5 * wi)]
        laws.append(RoundLaw(np.array(vals), np.array(probs)))
    return laws


def _mixture(laws: Sequence[RoundLaw]) -> RoundLaw:
    k = len(laws)
    vals = np.concatenate([l.values for l in laws])
    probs = np.concatenate([l.probs for l in laws]) / k
    return RoundLaw(vals, probs)


def lhwp_verify(
    instance: HamiltonianInstance,
    psi,
    eta,
    seed: SeedLike = None,
    mode: str = "exact",
    rounds: int = 400,
    trials: int = 1,
) -> VerdictReport:
    """Energy-estimation verifier for a pure unknown input.

    Each round picks ``x ∈ S ∪ L`` uniformly. A plain term is measured in its
    eigenbasis and contributes the eigenvalue; a coupled term is measured in
    its eigenbasis, then the input register undergoes a swap test against a
    fresh copy of ``ψ`` and contributes ``−λ`` on accept and ``+λ`` on reject.
    ``M`` is the round mean and the verifier accepts iff ``K·M ≤ a + 1/p``.
    """
    K = len(instance.plain_terms) + len(instance.coupled_terms)
    laws = lhwp_round_laws(instance, psi, eta)
    mix = _mixture(laws)
    threshold = instance.a + 1.0 / instance.p
    expected = mix.mean
    t = 1.0 / (instance.p * K)
    stats: dict = {
        "K": K,
        "rounds": rounds,
        "threshold": threshold,
        "expected_estimator": expected,
        "expected_KM": K * expected,
        "deviation_bound": 2 * math.exp(-rounds * t * t / 2),
    }
    if mode == "exact":
        p_exact = None
        den = _lattice(mix.values)
        if den is not None:
            pmf, offset = _sum_pmf(mix.values, mix.probs, rounds, den)
            cut = math.floor(threshold * rounds * den / K + 1e-9)
            sums = np.arange(len(pmf)) + offset
            p_exact = float(min(1.0, pmf[sums <= cut].sum()))
        verdict = (p_exact >= 0.5) if p_exact is not None else (K * expected <= threshold)
        return VerdictReport(verdict=verdict, p_exact=p_exact, stats=stats)
    if mode != "sampled":
        raise ValueError("mode must be 'exact' or 'sampled'")
    rng = make_rng(seed)
    idx = kernels.sample_categorical(mix.probs, rng.random(rounds * trials)).reshape(trials, rounds)
    means = mix.values[idx].mean(axis=1)
    acc = K * means <= threshold + 1e-12
    stats["sampled_KM"] = float(K * means[0])
    p_hat = float(acc.mean())
    return VerdictReport(
        verdict=p_hat >= 0.5,
        p_hat=p_hat,
        trials=trials,
        half_width=hoeffding_half_width(trials, CONFIDENCE_DELTA),
        seed=_seed_int(seed),
        stats=stats,
    )


# ================================================================ LHwM

@dataclass
class MixedWitness:
    """Circuit witness ``C`` (an isometry on the work register) and state witness ``φ``."""

    isometry: np.ndarray
    phi: np.ndarray
    n_input: int
    n_witness: int
    verifier: GateCircuit
    m: int

    def reference(self, psi) -> np.ndarray:
        """``|ψ,φ,0⟩`` with the clock in ``|0…0⟩``."""
        w = work_state(self.verifier, psi, self.phi, self.n_input, self.n_witness)
        return np.kron(clock_vector(0, self.m), w)

    def build(self, psi) -> np.ndarray:
        return self.isometry @ work_state(self.verifier, psi, self.phi, self.n_input, self.n_witness)


def honest_mixed_witness(instance: HamiltonianInstance, phi) -> MixedWitness:
    """History-state witness of a clock instance."""
    lay: ClockLayout = instance.meta["layout"]
    v: GateCircuit = instance.meta["verifier"]
    return MixedWitness(history_isometry(v), as_vector(phi), lay.n_input, lay.n_witness, v, lay.m)


def identity_mixed_witness(instance: HamiltonianInstance, phi) -> MixedWitness:
    """Witness that leaves the clock at time 0; its overlap test is deterministic."""
    lay: ClockLayout = instance.meta["layout"]
    v: GateCircuit = instance.meta["verifier"]
    dw = 1 << lay.n_work
    iso = np.kron(clock_vector(0, lay.m)[:, None], np.eye(dw))
    return MixedWitness(iso, as_vector(phi), lay.n_input, lay.n_witness, v, lay.m)


def _x_law(a: np.ndarray, b: np.ndarray, qubits: Sequence[int], r: int, u: np.ndarray, n: int) -> np.ndarray:
    """``[Pr X=−1, Pr X=0, Pr X=+1]`` of the Hadamard overlap test."""
    k = len(qubits)
    xr = np.zeros((1 << k, 1 << k), dtype=np.complex128)
    xr[np.arange(1 << k) ^ r, np.arange(1 << k)] = 1
    ap = apply_operator(a, xr, qubits, n)
    bp = apply_operator(b, u, qubits, n)
    rows_p = split_register(0.5 * (ap + bp), qubits, n)
    rows_m = split_register(0.5 * (ap - bp), qubits, n)
    pp = float(np.sum(np.abs(rows_p[r]) ** 2))
    pm = float(np.sum(np.abs(rows_m[r]) ** 2))
    tot = 0.25 * (np.vdot(ap, ap).real + np.vdot(bp, bp).real) * 2
    return np.array([pm, max(0.0, tot - pp - pm), pp])


@dataclass(frozen=True)
class SectorLaw:
    term: int
    r: int
    eigenvalue: float
    x_law: np.ndarray  # [P(-1), P(0), P(+1)]
    step2: float  # −λ_r Σ p_i ⟨η_i|(ψ_iψ_i† ⊗ |v_r⟩⟨v_r|)|η_i⟩

    @property
    def x_mean(self) -> float:
        return float(self.x_law[2] - self.x_law[0])


def lhwm_laws(instance: HamiltonianInstance, rho, witness: MixedWitness) -> tuple[list[RoundLaw], list[SectorLaw]]:
    """Plain-term eigenvalue laws and per-sector ``X`` laws, averaged over the eigen-ensemble of ``ρ``."""
    n = instance.n_total_qubits
    ens = ordered_eigendecomposition(rho)
    etas = [(p, psi, witness.build(psi), witness.reference(psi)) for p, psi in ens]
    plain = []
    for t in instance.plain_terms:
        w, v = _term_eig(t.matrix)
        q = np.zeros(len(w))
        for p, _, eta, _ in etas:
            mtx = split_register(eta, t.qubits, n)
            q += p * np.sum(np.abs(v.conj().T @ mtx) ** 2, axis=1)
        plain.append(RoundLaw(w, q))
    sectors = []
    inp = instance.input_qubits
    for j, t in enumerate(instance.coupled_terms):
        w, v = _term_eig(t.matrix)
        u = v.conj().T
        for r in range(len(w)):
            law = np.zeros(3)
            s2 = 0.0
            proj = np.outer(v[:, r], v[:, r].conj())
            for p, psi, eta, ref in etas:
                law += p * _x_law(ref, eta, t.qubits, r, u, n)
                post = apply_operator(eta, proj, t.qubits, n)
                s2 += p * partial_overlap_weight(post, psi, inp)
            sectors.append(SectorLaw(j, r, float(w[r]), law, -float(w[r]) * s2))
    return plain, sectors


def _abort_tolerance(p: int, block: int, delta: float = CONFIDENCE_DELTA) -> float:
    """``1/(2p²)`` widened to a Hoeffding radius for ``X ∈ [−1, 1]`` at ``block`` draws."""
    return max(1.0 / (2 * p * p), 2 * hoeffding_half_width(block, delta))


def _block_sum_pmf(law: np.ndarray, block: int) -> np.ndarray:
    """pmf of ``Σ X`` over ``block`` draws, indexed from ``−block``."""
    pmf, _ = _sum_pmf(np.array([-1.0, 0.0, 1.0]), law, block, 1)
    return pmf


def lhwm_verify(
    instance: HamiltonianInstance,
    rho,
    witness: MixedWitness,
    alpha_prover: float,
    seed: SeedLike = None,
    mode: str = "exact",
    rounds: int = 400,
    block: int = 200,
    trials: int = 1,
) -> VerdictReport:
    """Energy-estimation verifier for a mixed unknown input.

    Rounds pick ``x ∈ S ∪ L×[2^k]`` uniformly. Plain rounds measure the term
    on ``C(ψ,φ,0)``. A coupled round ``(ℓ, r)`` with ``λ_r ≠ 0`` runs two
    blocks of Hadamard overlap tests: the first gives
    ``W = −λ_r·α_prover·mean(X)``, the second aborts the run when its mean
    strays from ``α_prover`` by more than the tolerance. Sectors with
    ``λ_r = 0`` contribute 0. Accept iff no abort and ``K·M ≤ a + 2/p``.
    """
    if not -1.0 <= alpha_prover <= 1.0:
        raise ValueError("alpha_prover must lie in [-1, 1]")
    plain, sectors = lhwm_laws(instance, rho, witness)
    K = len(plain) + len(sectors)
    tol = _abort_tolerance(instance.p, block)
    threshold = instance.a + 2.0 / instance.p

    exp_vals = [l.mean for l in plain]
    abort_p = []
    for s in sectors:
        if s.eigenvalue == 0.0:
            exp_vals.append(0.0)
            abort_p.append(0.0)
            continue
        exp_vals.append(-s.eigenvalue * alpha_prover * s.x_mean)
        pmf = _block_sum_pmf(s.x_law, block)
        means = (np.arange(len(pmf)) - block) / block
        abort_p.append(min(1.0, float(pmf[np.abs(alpha_prover - means) > tol + 1e-12].sum())))
    expected_km = float(np.sum(exp_vals))
    round_abort = float(np.sum(abort_p)) / K
    no_abort = (1.0 - round_abort) ** rounds
    stats: dict = {
        "K": K,
        "rounds": rounds,
        "block": block,
        "abort_tolerance": tol,
        "threshold": threshold,
        "expected_KM": expected_km,
        "no_abort_probability": no_abort,
        "sector_W_expectations": [exp_vals[len(plain) + i] for i in range(len(sectors))],
        "sector_step2": [s.step2 for s in sectors],
        "sector_abort_probability": abort_p,
    }
    if mode == "exact":
        verdict = no_abort >= 0.5 and expected_km <= threshold
        return VerdictReport(verdict=verdict, stats=stats)
    if mode != "sampled":
        raise ValueError("mode must be 'exact' or 'sampled'")
    rng = make_rng(seed)
    accepted = 0
    aborted_runs = 0
    x_vals = np.array([-1.0, 0.0, 1.0])
    for _ in range(trials):
        choice = rng.integers(0, K, size=rounds)
        total = 0.0
        aborted = False
        for x in choice:
            if x < len(plain):
                law = plain[x]
                total += law.values[kernels.sample_categorical(law.probs, rng.random(1))[0]]
                continue
            s = sectors[x - len(plain)]
            if s.eigenvalue == 0.0:
                continue
            draws = x_vals[kernels.sample_categorical(s.x_law, rng.random(2 * block))]
            if abs(alpha_prover - draws[block:].mean()) > tol:
                aborted = True
                break
            total += -s.eigenvalue * alpha_prover * draws[:block].mean()
        if aborted:
            aborted_runs += 1
        elif total / rounds * K <= threshold:
            accepted += 1
    p_hat = accepted / trials
    stats["aborted_runs"] = aborted_runs
    return VerdictReport(
        verdict=p_hat >= 0.5,
        p_hat=p_hat,
        trials=trials,
        half_width=hoeffding_half_width(trials, CONFIDENCE_DELTA),
        seed=_seed_int(seed),
        stats=stats,
    )


# ================================================================ amplification

@dataclass(frozen=True)
class AmplifiedVerifier:
    """``s`` parallel runs of a base test ``E``; accept iff at least ``s(a − 1/(2p))`` accept."""

    accept_operator: np.ndarray
    a: float
    p: float
    s: int

    @property
    def threshold(self) -> float:
        return self.s * 0.5 * (2 * self.a - 1.0 / self.p)

    @property
    def min_accepts(self) -> int:
        return max(0, math.ceil(self.threshold - 1e-12))

    def product_acceptance(self, q: float) -> float:
        """Exact acceptance when every run accepts independently with probability ``q``."""
        return float(binom.sf(self.min_accepts - 1, self.s, min(1.0, max(0.0, q))))

    def iid_bound(self) -> float:
        """Acceptance of the dominating Bernoulli(a − 1/p) chain."""
        return self.product_acceptance(self.a - 1.0 / self.p)

    def acceptance(self, witness) -> float:
        """Exact acceptance on an arbitrary (possibly entangled) ``s``-register witness."""
        e1 = np.asarray(self.accept_operator, dtype=np.complex128)
        d = e1.shape[0]
        if d**self.s > 1 << MAX_QUBITS:
            raise DimensionError("too many parallel runs to simulate exactly")
        e0 = np.eye(d) - e1
        rho = as_matrix(witness)
        if rho.shape[0] != d**self.s:
            raise DimensionError("witness does not match s copies of the base register")
        counts = np.zeros(self.s + 1)
        for bits in range(1 << self.s):
            op = np.ones((1, 1), dtype=np.complex128)
            for j in range(self.s):
                op = np.kron(op, e1 if (bits >> (self.s - 1 - j)) & 1 else e0)
            counts[bin(bits).count("1")] += float(np.real(np.sum(op * rho.T)))
        return float(counts[self.min_accepts:].sum())

    def sample(self, q: float, trials: int, seed: SeedLike) -> float:
        """Empirical acceptance on product witnesses with per-run probability ``q``."""
        rng = make_rng(seed)
        u = rng.random(trials * self.s)
        hits = kernels.bernoulli_counts(np.full(trials * self.s, q), u, self.s)
        return float(np.mean(hits >= self.min_accepts))


def amplify_parallel(accept_operator: np.ndarray, a: float, p: float, s: int) -> AmplifiedVerifier:
    e = np.asarray(accept_operator, dtype=np.complex128)
    if not is_bounded_psd(e):
        raise ValueError("the acceptance operator must satisfy 0 ⪯ E ⪯ I")
    if s < 1 or s > 10**6:
        raise DimensionError("s is outside the simulable range")
    return AmplifiedVerifier(e, float(a), float(p), int(s))


# ================================================================ search to decision

PrefixOracle = Callable[[str], bool]


def classical_witness_acceptance(verifier: GateCircuit, n_input: int, n_witness: int, psi, answer_qubit: int | None = None) -> np.ndarray:
    """Acceptance probability for every classical witness; entry ``int(w, 2)``."""
    nv = verifier.n_qubits
    ans = nv - 1 if answer_qubit is None else answer_qubit
    out = np.empty(1 << n_witness)
    mask = ((np.arange(1 << nv) >> ans) & 1).astype(bool)
    for j in range(1 << n_witness):
        phi = np.zeros(1 << n_witness, dtype=np.complex128)
        phi[j] = 1
        v = verifier.apply(work_state(verifier, psi, phi, n_input, n_witness))
        out[j] = float(np.sum(np.abs(v[mask]) ** 2))
    return out


def random_witness_verifier(n_witness: int, seed: SeedLike, n_gates: int = 24) -> GateCircuit:
    """Random circuit on one input qubit, the witness and one answer qubit.

    Gates are Haar single-qubit unitaries, CNOTs and Toffolis; half of the
    multi-qubit gates target the answer qubit so acceptance depends on the witness.
    """
    from .qcore import haar_unitary

    rng = make_rng(seed)
    nq = n_witness + 2
    ans = nq - 1
    c = GateCircuit(nq)
    for _ in range(n_gates):
        kind = int(rng.integers(0, 3))
        qs = [int(q) for q in rng.permutation(ans)]
        target = ans if rng.random() < 0.5 else qs[-1]
        if kind == 0:
            c.add("U", target, matrix=haar_unitary(2, rng))
        elif kind == 1:
            c.add("CNOT", qs[0], target)
        else:
            c.add("TOFFOLI", qs[0], qs[1], target)
    return c


def _suffix_max(table: np.ndarray, n: int, prefix: str) -> float:
    k = len(prefix)
    lo = int(prefix, 2) << (n - k) if k else 0
    return float(table[lo: lo + (1 << (n - k))].max())


def exact_prefix_oracle(table: np.ndarray, n: int, a: float, eps: float, seed: SeedLike) -> PrefixOracle:
    """Exhaustive decider of the prefix language; don't-care answers are random bits."""
    rng = make_rng(seed)

    def oracle(prefix: str) -> bool:
        best = _suffix_max(table, n, prefix)
        k = len(prefix)
        if best >= a - k * eps / (2 * n) - 1e-12:
            return True
        if best < a - (k + 1) * eps / (2 * n):
            return False
        return bool(rng.integers(0, 2))

    return oracle


def sampled_prefix_oracle(table: np.ndarray, n: int, a: float, eps: float, shots: int, seed: SeedLike) -> PrefixOracle:
    """Estimate every suffix's acceptance from ``shots`` runs and threshold at the band midpoint."""
    rng = make_rng(seed)

    def oracle(prefix: str) -> bool:
        k = len(prefix)
        lo = int(prefix, 2) << (n - k) if k else 0
        ps = table[lo: lo + (1 << (n - k))]
        est = rng.binomial(shots, np.clip(ps, 0, 1)) / shots
        return bool(est.max() >= a - (k + 0.5) * eps / (2 * n))

    return oracle


@dataclass(frozen=True)
class SearchResult:
    witness: str
    acceptance: float
    target: float
    promise_ok: bool
    steps: tuple[tuple[str, bool, bool], ...]  # (queried prefix, answer, kept prefix in Good)

    @property
    def success(self) -> bool:
        return self.acceptance >= self.target - 1e-12

    @property
    def good_invariant(self) -> bool:
        return all(g for _, _, g in self.steps)


def search_to_decision(
    table: np.ndarray,
    a: float,
    eps: float,
    oracle: PrefixOracle,
    strict: bool = True,
) -> SearchResult:
    """Recover a witness bit by bit from a prefix decision oracle.

    ``table[int(w, 2)]`` is the acceptance probability of witness ``w``. The
    prefix ``x`` is extended with 0 when the oracle accepts ``x‖0`` and with 1
    otherwise.
    """
    table = np.asarray(table, dtype=np.float64)
    n = int(table.shape[0]).bit_length() - 1
    if n < 1 or 1 << n != table.shape[0]:
        raise ValueError("the acceptance table must have 2^n entries")
    promise_ok = bool(table.max() >= a - 1e-12)
    if strict and not promise_ok:
        raise PromiseViolation("no witness reaches the completeness threshold")
    w = ""
    steps = []
    for _ in range(n):
        cand = w + "0"
        w = cand if oracle(cand) else w + "1"
        good = _suffix_max(table, n, w) >= a - (len(w) + 1) * eps / (2 * n) - 1e-12
        steps.append((cand, w == cand, good))
    return SearchResult(w, float(table[int(w, 2)]), a - eps, promise_ok, tuple(steps))


# ================================================================ state identification

def _rotation(eps_to_one: float) -> np.ndarray:
    """Real rotation taking |0⟩ to ``√(1−e)|0⟩ + √e|1⟩``."""
    c, s = math.sqrt(1 - eps_to_one), math.sqrt(eps_to_one)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def _membership_kraus(proj: np.ndarray, eps: float) -> dict[int, list[np.ndarray]]:
    """Kraus operators of ``U``, answer readout, ``U†``, with the ancilla then discarded.

    ``U = Π_S ⊗ R1 + (I−Π_S) ⊗ R0``; ``R1`` answers 1 and ``R0`` answers 0,
    each with error ``eps``. Outcome 1 means "in the set".
    """
    r1 = _rotation(1 - eps)
    r0 = _rotation(eps)
    eye = np.eye(proj.shape[0])
    out: dict[int, list[np.ndarray]] = {0: [], 1: []}
    for o in (0, 1):
        for j in (0, 1):
            c1 = r1[o, 0] * np.conj(r1[o, j])
            c0 = r0[o, 0] * np.conj(r0[o, j])
            out[o].append(c1 * proj + c0 * (eye - proj))
    return out


def _span_projector(states: Sequence[np.ndarray]) -> np.ndarray:
    q = _orthonormal(np.stack(states, axis=1))
    return q @ q.conj().T


@dataclass(frozen=True)
class IdentifyResult:
    index: int
    key: object
    success_probability: float | None  # of ``target``, else of the returned index
    bound: float
    queries: int
    distribution: tuple[float, ...] | None = None


def identify_state(
    psi,
    candidates: Sequence[tuple[object, np.ndarray]],
    eps: float = 0.0,
    seed: SeedLike = None,
    target: int | None = None,
    overlap_threshold: float = 0.5,
) -> IdentifyResult:
    """Binary search over ordered candidates with measure-and-rewind membership tests.

    With at most 16 candidates every outcome branch is followed and the exact
    output distribution is reported. Without a seed the most likely index is
    returned; with a seed one branch is sampled.
    """
    keys = [k for k, _ in candidates]
    if any(not (keys[i] < keys[i + 1]) for i in range(len(keys) - 1)):
        raise ValueError("candidate set is not sorted by key")
    states = [as_vector(s) for _, s in candidates]
    for i in range(len(states)):
        for j in range(i):
            if abs(np.vdot(states[i], states[j])) ** 2 >= overlap_threshold:
                raise ValueError("candidates overlap too strongly")
    N = len(states)
    depth = math.ceil(math.log2(N)) if N > 1 else 0
    bound = 1 - 4 * depth * eps
    rho0 = as_matrix(psi)
    cache: dict[tuple[int, int], dict] = {}

    def kraus(lo: int, mid: int):
        if (lo, mid) not in cache:
            cache[(lo, mid)] = _membership_kraus(_span_projector(states[lo:mid]), eps)
        return cache[(lo, mid)]

    def branch(rho: np.ndarray, ks: list[np.ndarray]) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in ks)

    dist = None
    if N <= 16:
        dist = np.zeros(N)

        def explore(lo: int, hi: int, rho: np.ndarray) -> None:
            if hi - lo == 1:
                dist[lo] += float(np.trace(rho).real)
                return
            mid = (lo + hi) // 2
            ks = kraus(lo, mid)
            explore(lo, mid, branch(rho, ks[1]))
            explore(mid, hi, branch(rho, ks[0]))

        explore(0, N, rho0)
    if seed is None:
        if dist is None:
            raise DimensionError("exact branching needs at most 16 candidates; pass a seed")
        index = int(np.argmax(dist))
    else:
        rng = make_rng(seed)
        lo, hi, rho = 0, N, rho0
        while hi - lo > 1:
            mid = (lo + hi) // 2
            ks = kraus(lo, mid)
            yes = branch(rho, ks[1])
            p_yes = float(np.trace(yes).real)
            if rng.random() < p_yes:
                hi, rho = mid, yes / p_yes
            else:
                no = branch(rho, ks[0])
                lo, rho = mid, no / float(np.trace(no).real)
        index = lo
    success = None
    if dist is not None:
        success = float(dist[index if target is None else target])
    return IdentifyResult(index, keys[index], success, bound, depth, None if dist is None else tuple(dist))
