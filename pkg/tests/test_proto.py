import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qplab import proto as P
from qplab.circuit import GateCircuit
from qplab.qcore import haar_unitary, random_density, trace_distance


def _tail_half(t, k):
    return sum(math.comb(t, j) for j in range(k, t + 1)) / 2**t


def test_mixedness_no_case_is_binomial_tail():
    tr = P.mixedness_protocol(np.eye(2) / 2, 16, P.helstrom_prover())
    assert tr.p_exact == pytest.approx(_tail_half(16, 10), abs=1e-12)
    assert tr.p_exact == pytest.approx(0.227249, abs=5e-7)
    # a prover that always names coin 0 does no better
    assert P.mixedness_protocol(np.eye(2) / 2, 16, P.constant_prover(0)).p_exact == pytest.approx(tr.p_exact)


def test_mixedness_yes_case_amplifies():
    rho = np.diag([1.0, 0.0])  # trace distance ½ from I/2
    short = P.mixedness_protocol(rho, 16, P.helstrom_prover()).p_exact
    long = P.mixedness_protocol(rho, 64, P.helstrom_prover()).p_exact
    assert long > short and long > 0.99


def test_mixedness_sampled_transcript():
    tr = P.mixedness_protocol(np.diag([1.0, 0.0]), 8, P.helstrom_prover(), seed=3)
    assert len(tr.messages) == 16 and tr.verdict in (True, False)
    d = tr.to_dict()
    assert d["protocol"] == "mixedness" and len(d["coins"]["b"]) == 8


def test_maxent_completeness_and_soundness():
    epr = P.epr_state(1)
    assert P.max_entangled_protocol(epr, 5, P.uhlmann_prover()).p_exact == pytest.approx(1)
    assert P.max_entangled_protocol(epr, 5, P.identity_prover()).p_exact == pytest.approx(1)
    prod = np.array([1, 0, 0, 0], dtype=complex)  # reduced state at trace distance ½ from I/2
    per = P.max_entangled_protocol(prod, 1, P.uhlmann_prover()).stats["per_round_pass"]
    assert per == pytest.approx(0.75) and per <= 7 / 8


def _circuits(seed, n=2):
    rng = np.random.default_rng(seed)
    cs = []
    for _ in range(2):
        c = GateCircuit(n)
        for _ in range(3):
            for q in range(n):
                c.add("U", q, matrix=haar_unitary(2, int(rng.integers(1 << 30))))
            c.add("CNOT", 0, 1)
        cs.append(c)
    return cs


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_coqsdwp_honest_value(seed):
    q0, q1 = _circuits(seed)
    phi = np.eye(4)[0]
    tr = P.coqsdwp_protocol(phi, q0, q1, [0], P.uhlmann_prover())
    f = tr.stats["fidelity"]
    assert tr.p_exact == pytest.approx(0.5 + 0.5 * f * f, abs=1e-9)


def test_polarization_gadgets():
    r0, r1 = random_density(1, 1).matrix, random_density(1, 2).matrix
    d = trace_distance(r0, r1)
    x0, x1 = P.xor_gadget(r0, r1, 3)
    assert trace_distance(x0, x1) == pytest.approx(d**3, abs=1e-10)
    p0, p1 = P.direct_product(r0, r1, 3)
    assert trace_distance(p0, p1) >= d - 1e-12
    with pytest.raises(ValueError):
        P.Polarization(7, 1, 1).apply(r0, r1)


def test_public_coin_honest_and_cheat_values():
    q0, q1 = _circuits(5)
    tr = P.public_coin_qsd(np.eye(4)[0], q0, q1, [0], P.public_coin_honest_prover())
    f = tr.stats["fidelity"]
    assert tr.p_exact == pytest.approx(0.75 + 0.25 * f * f, abs=1e-9)
    orth = P.public_coin_cheat_value(np.diag([1.0, 0]), np.diag([0, 1.0]))
    assert orth.value == pytest.approx(0.75, abs=1e-8)
    s0, s1 = random_density(1, 8).matrix, random_density(1, 9).matrix
    cv = P.public_coin_cheat_value(s0, s1, starts=3)
    assert cv.value <= cv.bound + 1e-8


def test_efi_numbers():
    z, o = np.diag([1.0, 0]), np.diag([0, 1.0])
    assert P.efi_protocol(z, z, z, o, 10, P.helstrom_prover()).p_exact == pytest.approx(2.0**-10, abs=1e-15)
    assert P.efi_protocol(z, o, z, o, 6, P.helstrom_prover()).p_exact == pytest.approx(1)


def test_simulators():
    sv = P.hv_simulator("mixedness", {"rho_in": np.eye(2) / 2}, 1)
    assert sv.trace_distance == 0
    sv = P.hv_simulator("maxent", {"phi_in": P.epr_state(1)}, 2)
    assert sv.trace_distance == pytest.approx(0, abs=1e-10)
    # unequal Helstrom errors make the symmetric guess-law simulator off by ¼
    sv = P.hv_simulator("mixedness", {"rho_in": np.diag([1.0, 0])}, 2)
    assert sv.trace_distance == pytest.approx(0.25, abs=1e-10)
    with pytest.raises(ValueError):
        P.hv_simulator("nope", {}, 1)


def test_transcript_elides_large_states():
    tr = P.ProtocolTranscript("x")
    tr.send("verifier", np.eye(32))
    tr.send("verifier", np.eye(2))
    d = tr.to_dict()
    assert d["messages"][0]["payload"] == {"elided_shape": [32, 32]}
    assert len(d["messages"][1]["payload"]) == 4


def test_identical_circuits_accept_surely():
    q0, _ = _circuits(2)
    tr = P.coqsdwp_protocol(np.eye(4)[0], q0, q0, [0], P.uhlmann_prover())
    assert tr.p_exact == pytest.approx(1)
    assert tr.stats["fidelity"] == pytest.approx(1)
