import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qplab.circuit import GATES, GateCircuit
from qplab.qcore import haar_state, haar_unitary


def _random_circuit(n, seed, depth=8):
    rng = np.random.default_rng(seed)
    c = GateCircuit(n)
    for _ in range(depth):
        kind = rng.integers(0, 4)
        qs = [int(q) for q in rng.permutation(n)]
        if kind == 0:
            c.add("H", qs[0])
        elif kind == 1:
            c.add("T", qs[0])
        elif kind == 2 and n > 1:
            c.add("CNOT", qs[0], qs[1])
        else:
            c.add("U", qs[0], matrix=haar_unitary(2, int(rng.integers(1 << 30))))
    return c


def test_cnot_control_is_first_listed_qubit():
    c = GateCircuit(2).add("CNOT", 0, 1)
    v = np.zeros(4, complex)
    v[0b01] = 1  # qubit 0 set
    out = c.apply(v)
    assert abs(out[0b11]) == pytest.approx(1)


def test_toffoli_flips_only_when_both_controls_set():
    c = GateCircuit(3).add("TOFFOLI", 0, 1, 2)
    u = c.unitary()
    for i in range(8):
        j = i ^ 4 if (i & 3) == 3 else i
        assert abs(u[j, i]) == pytest.approx(1)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6))
def test_apply_matches_dense_unitary(n, seed):
    c = _random_circuit(n, seed)
    psi = haar_state(n, seed).amplitudes
    np.testing.assert_allclose(c.apply(psi), c.unitary() @ psi, atol=1e-12)
    np.testing.assert_allclose(c.inverse().apply(c.apply(psi)), psi, atol=1e-12)


def test_json_round_trip_bit_exact():
    c = _random_circuit(3, 9)
    back = GateCircuit.from_json(c.to_json())
    np.testing.assert_array_equal(back.unitary(), c.unitary())


def test_bad_gate_rejected():
    with pytest.raises((KeyError, ValueError)):
        GateCircuit(2).add("NOPE", 0)
    with pytest.raises(ValueError):
        GateCircuit(2).add("CNOT", 0, 0)


def test_gate_table_is_unitary():
    for name, m in GATES.items():
        np.testing.assert_allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=1e-12, err_msg=name)
