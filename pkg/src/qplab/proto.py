"""Two-party protocol simulations with pluggable prover strategies.

Every protocol reports its exact acceptance probability and, given a seed,
samples one concrete run into a transcript.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import binom

from ._rng import SeedLike, make_rng
from .circuit import GateCircuit
from .qcore import (
    MAX_QUBITS,
    DimensionError,
    TwoOutcomePOVM,
    as_matrix,
    as_vector,
    fidelity,
    helstrom_measurement,
    kron_all,
    sqrtm_psd,
    trace_distance,
    uhlmann_unitary,
)
from .qprim import split_register

STATE_ELIDE_DIM = 16


@dataclass(frozen=True)
class ProverStrategy:
    """A named prover; ``respond`` maps the prover's context to its reply.

    The context holds only what the prover may see: message registers and a
    classical description of the public input.
    """

    label: str
    respond: Callable[[dict], Any]


@dataclass
class ProtocolTranscript:
    protocol: str
    messages: list[tuple[str, Any]] = field(default_factory=list)
    coins: dict = field(default_factory=dict)
    verdict: bool | None = None
    p_exact: float | None = None
    stats: dict = field(default_factory=dict)

    def send(self, sender: str, payload: Any) -> None:
        self.messages.append((sender, payload))

    def to_dict(self) -> dict:
        def enc(p):
            if isinstance(p, np.ndarray):
                if p.size > STATE_ELIDE_DIM * STATE_ELIDE_DIM:
                    return {"elided_shape": list(p.shape)}
                return [[float(z.real), float(z.imag)] for z in p.reshape(-1)]
            if isinstance(p, dict):
                return {k: enc(v) for k, v in p.items()}
            if isinstance(p, (list, tuple)):
                return [enc(v) for v in p]
            if isinstance(p, (np.integer, np.floating)):
                return p.item()
            return p

        return {
            "protocol": self.protocol,
            "messages": [{"sender": s, "payload": enc(p)} for s, p in self.messages],
            "coins": enc(self.coins),
            "verdict": None if self.verdict is None else ("accept" if self.verdict else "reject"),
            "p_exact": self.p_exact,
            "stats": enc(self.stats),
        }


def _seed_info(seed: SeedLike) -> int | None:
    return int(seed) if isinstance(seed, (int, np.integer)) else None


def epr_state(n_qubits: int) -> np.ndarray:
    """``Σ_i |i⟩|i⟩ / √d`` on two ``n_qubits`` registers."""
    d = 1 << n_qubits
    return np.eye(d, dtype=np.complex128).reshape(-1) / math.sqrt(d)


def canonical_purification(rho) -> np.ndarray:
    """``(√ρ ⊗ I)|Ω⟩`` with the purifying copy as the right factor."""
    m = as_matrix(rho)
    return sqrtm_psd(m).reshape(-1).astype(np.complex128)


def circuit_output(circuit: GateCircuit, phi, output_qubits: Sequence[int]) -> tuple[np.ndarray, tuple[int, int]]:
    """Run ``circuit`` on ``|φ⟩|0…0⟩`` and regroup as output ⊗ rest.

    Returns the pure state in Kronecker order (output register left) and the
    dimensions of the two factors.
    """
    vphi = as_vector(phi)
    n = circuit.n_qubits
    k = int(vphi.shape[0]).bit_length() - 1
    if k > n:
        raise DimensionError("input state is larger than the circuit register")
    full = np.zeros(1 << n, dtype=np.complex128)
    full[: 1 << k] = vphi
    out = circuit.apply(full)
    mat = split_register(out, list(output_qubits), n)
    return mat.reshape(-1), (mat.shape[0], mat.shape[1])


def _apply_kraus_right(psi: np.ndarray, kraus: Sequence[np.ndarray], dims: tuple[int, int]) -> np.ndarray:
    """Density matrix of ``Σ (I⊗K)|ψ⟩⟨ψ|(I⊗K)†``."""
    da, db = dims
    m = psi.reshape(da, db)
    rho = np.zeros((da * db, da * db), dtype=np.complex128)
    for k in kraus:
        v = (m @ np.asarray(k).T).reshape(-1)
        rho += np.outer(v, v.conj())
    return rho


def _as_kraus(reply) -> list[np.ndarray]:
    if isinstance(reply, np.ndarray):
        return [reply]
    return [np.asarray(k) for k in reply]


def _check_channel(kraus: Sequence[np.ndarray]) -> None:
    s = sum(k.conj().T @ k for k in kraus)
    if not np.allclose(s, np.eye(s.shape[0]), atol=1e-8):
        raise ValueError("prover reply is not a trace-preserving operation")


# ================================================================ mixedness

def helstrom_prover() -> ProverStrategy:
    """Optimal two-state measurement between the two possible messages."""
    return ProverStrategy("helstrom", lambda ctx: helstrom_measurement(ctx["state0"], ctx["state1"]))


def constant_prover(bit: int) -> ProverStrategy:
    def respond(ctx):
        d = as_matrix(ctx["state0"]).shape[0]
        eye, zero = np.eye(d), np.zeros((d, d))
        return TwoOutcomePOVM(eye, zero) if bit == 0 else TwoOutcomePOVM(zero, eye)

    return ProverStrategy(f"constant-{bit}", respond)


def binomial_tail(t: int, q: float, k: int) -> float:
    """``Pr[Bin(t, q) ≥ k]``."""
    return float(binom.sf(k - 1, t, q))


def mixedness_protocol(rho_in, t: int, prover: ProverStrategy, seed: SeedLike = None) -> ProtocolTranscript:
    """Each round the verifier sends ``ρ_in`` (coin 0) or ``I/d`` (coin 1).

    The prover names the coin; the verifier accepts iff at least ``5t/8``
    answers are right.
    """
    rho = as_matrix(rho_in)
    d = rho.shape[0]
    mixed = np.eye(d) / d
    povm: TwoOutcomePOVM = prover.respond({"state0": rho, "state1": mixed})
    q = 0.5 * (povm.probabilities(rho)[0] + povm.probabilities(mixed)[1])
    need = math.ceil(5 * t / 8 - 1e-12)
    tr = ProtocolTranscript("mixedness", p_exact=binomial_tail(t, q, need))
    tr.stats = {"round_agreement": q, "needed": need, "rounds": t, "prover": prover.label}
    if seed is not None:
        rng = make_rng(seed)
        coins = rng.integers(0, 2, size=t)
        right = 0
        for b in coins:
            sent = rho if b == 0 else mixed
            tr.send("verifier", sent)
            p0 = povm.probabilities(sent)[0]
            guess = 0 if rng.random() < p0 else 1
            tr.send("prover", int(guess))
            right += int(guess == b)
        tr.coins = {"seed": _seed_info(seed), "b": coins.tolist()}
        tr.verdict = right >= need
    return tr


# ================================================================ maximally entangled

def uhlmann_prover() -> ProverStrategy:
    """Uhlmann unitary on the returned half, mapping ``from_state`` toward ``to_state``."""
    return ProverStrategy("uhlmann", lambda ctx: [uhlmann_unitary(ctx["from_state"], ctx["to_state"], ctx["dims"])])


def identity_prover() -> ProverStrategy:
    return ProverStrategy("identity", lambda ctx: [np.eye(ctx["dims"][1])])


def max_entangled_protocol(phi_in, t: int, prover: ProverStrategy, seed: SeedLike = None) -> ProtocolTranscript:
    """The verifier sends halves of ``t`` EPR pairs and swap-tests the returned pairs against ``φ_in``.

    ``φ_in`` lives on ``A ⊗ B`` (``A`` left), each ``λ`` qubits. Accept iff
    every swap test passes.
    """
    vphi = as_vector(phi_in)
    n2 = int(vphi.shape[0]).bit_length() - 1
    if n2 % 2:
        raise DimensionError("input must have an even number of qubits")
    lam = n2 // 2
    d = 1 << lam
    epr = epr_state(lam)
    kraus = _as_kraus(prover.respond({"from_state": epr, "to_state": vphi, "dims": (d, d), "lambda": lam}))
    _check_channel(kraus)
    returned = _apply_kraus_right(epr, kraus, (d, d))
    overlap = float(np.real(np.vdot(vphi, returned @ vphi)))
    per_round = 0.5 + 0.5 * overlap
    tr = ProtocolTranscript("maxent", p_exact=per_round**t)
    tr.stats = {
        "per_round_pass": per_round,
        "fidelity_sq_to_mixed": fidelity(np.eye(d) / d, _reduce_left(vphi, d)) ** 2,
        "prover": prover.label,
    }
    if seed is not None:
        rng = make_rng(seed)
        passes = rng.random(t) < per_round
        for _ in range(t):
            tr.send("verifier", {"register": "B", "state": np.eye(d) / d})
            tr.send("prover", {"register": "B"})
        tr.coins = {"seed": _seed_info(seed), "swap_outcomes": [0 if p else 1 for p in passes]}
        tr.verdict = bool(passes.all())
    return tr


def _reduce_left(v: np.ndarray, da: int) -> np.ndarray:
    m = v.reshape(da, -1)
    return m @ m.conj().T


# ================================================================ co-QSDwP and polarization

def direct_product(rho0, rho1, r: int) -> tuple[np.ndarray, np.ndarray]:
    """``(ρ0^{⊗r}, ρ1^{⊗r})``."""
    m0, m1 = as_matrix(rho0), as_matrix(rho1)
    return kron_all([m0] * r), kron_all([m1] * r)


def xor_gadget(rho0, rho1, l: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform mixtures of ``σ_{x1}⊗…⊗σ_{xl}`` over strings of parity 0 and 1.

    The trace distance of the pair becomes the ``l``-th power of the original.
    """
    m = (as_matrix(rho0), as_matrix(rho1))
    out = [np.zeros((m[0].shape[0] ** l,) * 2, dtype=np.complex128) for _ in range(2)]
    for x in range(1 << l):
        bits = [(x >> j) & 1 for j in range(l)]
        out[sum(bits) & 1] += kron_all([m[b] for b in bits])
    scale = 2.0 ** (l - 1)
    return out[0] / scale, out[1] / scale


@dataclass(frozen=True)
class Polarization:
    """XOR with ``l``, then ``r``-fold direct product, then XOR with ``l2``."""

    l: int = 1
    r: int = 1
    l2: int = 1

    def apply(self, rho0, rho1) -> tuple[np.ndarray, np.ndarray]:
        if max(self.l, self.l2) > 6:
            raise ValueError("polarization degree is capped at 6")
        a, b = xor_gadget(rho0, rho1, self.l)
        a, b = direct_product(a, b, self.r)
        return xor_gadget(a, b, self.l2)


def coqsdwp_protocol(
    phi,
    q0: GateCircuit,
    q1: GateCircuit,
    output_qubits: Sequence[int],
    prover: ProverStrategy,
    polarize: Polarization | None = None,
    seed: SeedLike = None,
) -> ProtocolTranscript:
    """The verifier sends the non-output part of ``Q0|φ,0⟩``; the prover returns it and the
    verifier swap-tests the pair against a fresh ``Q1|φ,0⟩``.

    With ``polarize`` the two output states are first transformed by the
    gadgets and both circuits are replaced by canonical purifications.
    """
    if q0.n_qubits != q1.n_qubits:
        raise DimensionError("circuits act on different registers")
    chi0, dims = circuit_output(q0, phi, output_qubits)
    chi1, dims1 = circuit_output(q1, phi, output_qubits)
    if dims != dims1:
        raise DimensionError("circuit output registers mismatch")
    if polarize is not None:
        s0, s1 = polarize.apply(_reduce_left(chi0, dims[0]), _reduce_left(chi1, dims[0]))
        if s0.shape[0] ** 2 > 1 << MAX_QUBITS:
            raise DimensionError("polarized purifications exceed the qubit cap")
        chi0, chi1 = canonical_purification(s0), canonical_purification(s1)
        dims = (s0.shape[0], s0.shape[0])
    kraus = _as_kraus(prover.respond({"from_state": chi0, "to_state": chi1, "dims": dims}))
    _check_channel(kraus)
    returned = _apply_kraus_right(chi0, kraus, dims)
    p = 0.5 + 0.5 * float(np.real(np.vdot(chi1, returned @ chi1)))
    sig0, sig1 = _reduce_left(chi0, dims[0]), _reduce_left(chi1, dims[0])
    f = fidelity(sig0, sig1)
    tr = ProtocolTranscript("coqsdwp", p_exact=p)
    tr.stats = {"fidelity": f, "honest_value": 0.5 + 0.5 * f * f, "trace_distance": trace_distance(sig0, sig1), "prover": prover.label}
    if seed is not None:
        rng = make_rng(seed)
        tr.send("verifier", {"register": "B", "dims": list(dims)})
        tr.send("prover", {"register": "B"})
        tr.coins = {"seed": _seed_info(seed)}
        tr.verdict = bool(rng.random() < p)
    return tr


# ================================================================ public coin

def public_coin_honest_prover() -> ProverStrategy:
    """Send ``Q0|φ,0⟩``'s output part; on coin 1 apply the Uhlmann unitary to the rest."""

    def respond(ctx):
        u = uhlmann_unitary(ctx["chi0"], ctx["chi1"], ctx["dims"])
        return ctx["chi0"], {0: [np.eye(ctx["dims"][1])], 1: [u]}

    return ProverStrategy("honest", respond)


def public_coin_qsd(
    phi,
    q0: GateCircuit,
    q1: GateCircuit,
    output_qubits: Sequence[int],
    prover: ProverStrategy,
    seed: SeedLike = None,
) -> ProtocolTranscript:
    """Prover sends ``A``, verifier flips ``b``, prover returns ``B``; swap test against ``Q_b|φ,0⟩``."""
    chi0, dims = circuit_output(q0, phi, output_qubits)
    chi1, _ = circuit_output(q1, phi, output_qubits)
    first, replies = prover.respond({"chi0": chi0, "chi1": chi1, "dims": dims})
    first = as_vector(first)
    chis = (chi0, chi1)
    p = 0.0
    per_coin = []
    for b in (0, 1):
        kraus = _as_kraus(replies[b])
        _check_channel(kraus)
        rho = _apply_kraus_right(first, kraus, dims)
        pb = 0.5 + 0.5 * float(np.real(np.vdot(chis[b], rho @ chis[b])))
        per_coin.append(pb)
        p += 0.5 * pb
    f = fidelity(_reduce_left(chi0, dims[0]), _reduce_left(chi1, dims[0]))
    tr = ProtocolTranscript("publiccoin", p_exact=p)
    tr.stats = {"per_coin": per_coin, "fidelity": f, "honest_value": 0.75 + 0.25 * f * f, "prover": prover.label}
    if seed is not None:
        rng = make_rng(seed)
        b = int(rng.integers(0, 2))
        tr.send("prover", {"register": "A"})
        tr.send("verifier", b)
        tr.send("prover", {"register": "B"})
        tr.coins = {"seed": _seed_info(seed), "b": b}
        tr.verdict = bool(rng.random() < per_coin[b])
    return tr


@dataclass(frozen=True)
class CheatValue:
    value: float
    bound: float  # ¾ + ¼F(σ0, σ1)
    analytic: float | None  # exact optimum for pure σ's


def public_coin_cheat_value(sigma0, sigma1, starts: int = 8, seed: SeedLike = 0) -> CheatValue:
    """Best-response acceptance ``½ + ¼ max_τ (F(τ,σ0)² + F(τ,σ1)²)`` for a no-instance.

    The prover commits to ``A`` in state ``τ`` and then Uhlmann-rotates its
    purification toward the requested state. For pure ``σ``'s the optimum is
    ``½ + ¼λ_max(σ0+σ1)``; otherwise ``τ = GG†/Tr`` is searched with
    Nelder–Mead from several starts.
    """
    s0, s1 = as_matrix(sigma0), as_matrix(sigma1)
    d = s0.shape[0]
    f = fidelity(s0, s1)
    bound = 0.75 + 0.25 * f
    pure = all(abs(np.trace(s @ s).real - 1) < 1e-10 for s in (s0, s1))
    top = np.linalg.eigh(s0 + s1)
    analytic = 0.5 + 0.25 * float(top[0][-1]) if pure else None

    def unpack(x):
        g = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
        t = g @ g.conj().T
        return t / np.trace(t).real

    def neg(x):
        t = unpack(x)
        return -(fidelity(t, s0) ** 2 + fidelity(t, s1) ** 2)

    rng = make_rng(seed)
    v = top[1][:, -1]
    g0 = np.outer(v, np.eye(d)[0]) + 1e-3 * np.eye(d)
    inits = [np.concatenate([g0.real.reshape(-1), g0.imag.reshape(-1)])]
    inits += [rng.normal(size=2 * d * d) for _ in range(starts - 1)]
    best = 0.0
    for x0 in inits:
        res = minimize(neg, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
        best = max(best, -res.fun)
    value = 0.5 + 0.25 * best
    if analytic is not None:
        value = max(value, analytic)
    return CheatValue(value, bound, analytic)


# ================================================================ EFI

def efi_protocol(rho_a, rho_b, rho0, rho1, t: int, prover: ProverStrategy, seed: SeedLike = None) -> ProtocolTranscript:
    """Coin-controlled swaps of ``t`` pairs; the prover reports which pairs were swapped.

    The prover measures one extra copy of each input for reference answers,
    then measures every pair and flags a pair when either answer disagrees
    with the reference. Accept iff the flags equal the coins.
    """
    ma, mb = as_matrix(rho_a), as_matrix(rho_b)
    povm: TwoOutcomePOVM = prover.respond({"state0": as_matrix(rho0), "state1": as_matrix(rho1)})
    pa = povm.probabilities(ma)
    pb = povm.probabilities(mb)
    total = 0.0
    for xa in (0, 1):
        for xb in (0, 1):
            ref = pa[xa] * pb[xb]
            if ref <= 0:
                continue
            keep = pa[xa] * pb[xb]  # coin 0: A holds ρ_a, B holds ρ_b
            swapped = pb[xa] * pa[xb]  # coin 1: contents exchanged
            round_ok = 0.5 * keep + 0.5 * (1 - swapped)
            total += ref * round_ok**t
    tr = ProtocolTranscript("efi", p_exact=float(total))
    tr.stats = {"rounds": t, "prover": prover.label, "trace_distance": trace_distance(ma, mb)}
    if seed is not None:
        rng = make_rng(seed)
        coins = rng.integers(0, 2, size=t)
        xa = 0 if rng.random() < pa[0] else 1
        xb = 0 if rng.random() < pb[0] else 1
        flags = []
        for c in coins:
            left, right = (ma, mb) if c == 0 else (mb, ma)
            ya = 0 if rng.random() < povm.probabilities(left)[0] else 1
            yb = 0 if rng.random() < povm.probabilities(right)[0] else 1
            flags.append(int(ya != xa or yb != xb))
        tr.send("verifier", {"registers": "A_i B_i", "pairs": t})
        tr.send("prover", flags)
        tr.coins = {"seed": _seed_info(seed), "n": coins.tolist()}
        tr.verdict = flags == coins.tolist()
    return tr


# ================================================================ simulators

@dataclass(frozen=True)
class SimulatedView:
    simulated: np.ndarray
    real: np.ndarray
    trace_distance: float


def _classical(p: np.ndarray) -> np.ndarray:
    return np.diag(np.asarray(p, dtype=np.float64)).astype(np.complex128)


def hv_simulator(protocol: str, inputs: dict, i: int) -> SimulatedView:
    """Honest-verifier simulator for the verifier's view after ``i`` messages.

    The view holds the verifier's private registers and the latest message.
    Supported ids: ``mixedness``, ``maxent``, ``coqsdwp``, ``efi``.
    """
    if protocol == "mixedness":
        rho = as_matrix(inputs["rho_in"])
        d = rho.shape[0]
        mixed = np.eye(d) / d
        if i == 1:
            real = 0.5 * np.kron(np.diag([1, 0]), rho) + 0.5 * np.kron(np.diag([0, 1]), mixed)
            return SimulatedView(real.copy(), real, 0.0)
        if i == 2:
            povm = helstrom_measurement(rho, mixed)
            q0 = povm.probabilities(rho)[0]
            q1 = povm.probabilities(mixed)[1]
            # joint law of (b, b') in order 00, 01, 10, 11
            real = _classical([0.5 * q0, 0.5 * (1 - q0), 0.5 * (1 - q1), 0.5 * q1])
            sim = _classical([0.375, 0.125, 0.125, 0.375])
            return SimulatedView(sim, real, trace_distance(sim, real))
    elif protocol == "maxent":
        vphi = as_vector(inputs["phi_in"])
        lam = (int(vphi.shape[0]).bit_length() - 1) // 2
        d = 1 << lam
        epr = epr_state(lam)
        if i == 1:
            real = np.outer(epr, epr.conj())
            return SimulatedView(real.copy(), real, 0.0)
        if i == 2:
            u = uhlmann_unitary(epr, vphi, (d, d))
            v = (epr.reshape(d, d) @ u.T).reshape(-1)
            real = np.outer(v, v.conj())
            sim = np.outer(vphi, vphi.conj())
            return SimulatedView(sim, real, trace_distance(sim, real))
    elif protocol == "coqsdwp":
        chi0, dims = circuit_output(inputs["q0"], inputs["phi"], inputs["output_qubits"])
        chi1, _ = circuit_output(inputs["q1"], inputs["phi"], inputs["output_qubits"])
        if i == 1:
            real = np.outer(chi0, chi0.conj())
            return SimulatedView(real.copy(), real, 0.0)
        if i == 2:
            u = uhlmann_unitary(chi0, chi1, dims)
            v = (chi0.reshape(dims) @ u.T).reshape(-1)
            real = np.outer(v, v.conj())
            sim = np.outer(chi1, chi1.conj())
            return SimulatedView(sim, real, trace_distance(sim, real))
    elif protocol == "efi":
        t = int(inputs["t"])
        if i == 1:
            e = np.eye(1)
            return SimulatedView(e, e, 0.0)
        if i == 2:
            p = efi_protocol(inputs["rho_a"], inputs["rho_b"], inputs["rho0"], inputs["rho1"], t, helstrom_prover()).p_exact
            # the simulator outputs m = n; the real flags disagree with probability 1 − p
            real = _classical([p, 1 - p])
            sim = _classical([1.0, 0.0])
            return SimulatedView(sim, real, trace_distance(sim, real))
    else:
        raise ValueError(f"unknown protocol id {protocol!r}")
    raise ValueError(f"no simulator for message {i} of {protocol}")
