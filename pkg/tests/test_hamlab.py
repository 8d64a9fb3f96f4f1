import math

import numpy as np
import pytest

from qplab import hamlab as H
from qplab.circuit import GateCircuit
from qplab.qcore import haar_state

PHI = np.array([1, 0], dtype=complex)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_rejecting_ground_energy_matches_path_spectrum(m):
    # the halved clock chain of a surely-rejecting verifier is a path graph
    # whose lowest eigenvalue is 1 − cos(π/(2m+3))
    _, no, psi = H.clock_instance_pair(2, m, seed=10 + m)
    assert H.exact_min_energy(no, psi) == pytest.approx(1 - math.cos(math.pi / (2 * m + 3)), abs=1e-10)


def test_rejecting_gap_decays_no_faster_than_cubic():
    scaled = []
    for m in (1, 2, 3):
        _, no, psi = H.clock_instance_pair(2, m, seed=20 + m)
        scaled.append(H.exact_min_energy(no, psi) * (m + 1) ** 3)
    assert all(x <= y + 1e-12 for x, y in zip(scaled, scaled[1:]))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_history_state_is_zero_energy_for_accepting_verifier(m):
    yes, _, psi = H.clock_instance_pair(2, m, seed=m)
    eta = H.history_state(yes.meta["verifier"], psi, PHI, 2, 1)
    assert abs(np.linalg.norm(eta) - 1) < 1e-12
    assert H.energy(yes, psi, eta) <= yes.a
    assert yes.a == pytest.approx(1 / (2 ** 3 * (m + 1)))


def test_thresholds_and_term_count():
    yes, no, _ = H.clock_instance_pair(2, 2, seed=4)
    assert yes.b == no.b and yes.p == no.p
    assert yes.b - yes.a > 2 / yes.p
    assert yes.term_count() <= yes.p
    assert yes.promise_violations() == []


def test_single_input_qubit_three_gates_breaks_the_gap():
    # b falls below a here; the instance is reported as violating the promise
    _, no, _ = H.clock_instance_pair(1, 3, seed=0)
    assert no.b < no.a
    assert any("b - a" in v for v in no.promise_violations())


def test_instance_json_round_trip_bit_exact():
    yes, _, psi = H.clock_instance_pair(2, 2, seed=7)
    back = H.HamiltonianInstance.from_json(yes.to_json())
    np.testing.assert_array_equal(H.assemble(back, psi), H.assemble(yes, psi))
    with pytest.raises(ValueError, match="schema"):
        H.HamiltonianInstance.from_dict({**yes.to_dict(), "version": "old"})


def test_coupled_terms_avoid_the_input_register():
    yes, _, _ = H.clock_instance_pair(2, 2, seed=5)
    inp = set(yes.input_qubits)
    assert all(not inp & set(t.qubits) for t in yes.coupled_terms)


def test_assemble_accepts_density_input():
    yes, _, psi = H.clock_instance_pair(2, 1, seed=8)
    rho = np.outer(psi, psi.conj())
    np.testing.assert_allclose(H.assemble(yes, rho), H.assemble(yes, psi), atol=1e-14)


def test_history_isometry_is_isometry():
    c = GateCircuit(3).add("H", 0).add("CNOT", 0, 1).add("X", 2)
    v = H.history_isometry(c)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(v.shape[1]), atol=1e-12)


def test_geometric_bounds_hold_on_clock_split():
    yes, _, psi = H.clock_instance_pair(2, 2, seed=9)
    h1, h2 = H.clock_block_operators(yes, psi)
    gb = H.geometric_bounds(h1, h2)
    assert gb.holds
    assert gb.lower_bound <= gb.exact_min + 1e-10
