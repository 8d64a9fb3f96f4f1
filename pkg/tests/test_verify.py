import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qplab import hamlab as H
from qplab import verify as V
from qplab.circuit import GateCircuit
from qplab.qcore import haar_unitary, random_density

PHI = np.array([1, 0], dtype=complex)


# ---------------------------------------------------------------- Quantum OR

def _dense_qor(rho, lam, n, m, eta):
    """Density-matrix reference for the alternating-projection test."""
    dA, N = 1 << n, 1 << m
    F = np.exp(2j * np.pi * np.outer(np.arange(N), np.arange(N)) / N) / math.sqrt(N)
    pi = np.zeros((dA * N * N,) * 2, dtype=complex)
    for i in range(N):
        X = np.zeros((N, N))
        for b in range(N):
            X[b ^ i, b] = 1
        Xi = np.kron(np.eye(dA), X)
        q = F[:, i]
        pi += np.kron(Xi @ lam @ Xi, np.outer(q, q.conj()))
    zero_c = np.zeros((N, N))
    zero_c[0, 0] = 1
    delta = np.kron(np.eye(dA * N), zero_c)
    e0 = np.zeros((N, N))
    e0[0, 0] = 1
    state = np.kron(np.kron(rho, e0), e0)
    K = delta @ (np.eye(pi.shape[0]) - pi)
    for _ in range(math.ceil(N / eta - 1e-12)):
        state = K @ state @ K.conj().T
    return 1 - np.trace(state).real


@settings(max_examples=12, deadline=None)
@given(st.integers(1, 2), st.integers(1, 2), st.integers(0, 10**6), st.sampled_from(["yes", "no"]))
def test_qor_matches_dense_reference(n, m, seed, case):
    inst = V.qor_yes_instance(n, m, seed) if case == "yes" else V.qor_no_instance(n, m, seed)
    got = V.qor_accept_probability(inst.rho, inst, 2 / 3)
    assert got == pytest.approx(_dense_qor(inst.rho, inst.lambda_projector, n, m, 2 / 3), abs=1e-10)


def test_qor_zero_projector_never_accepts():
    inst = V.QorInstance(np.zeros((8, 8)), 1, 2, np.eye(2) / 2)
    assert V.qor_accept_probability(inst.rho, inst, 2 / 3) == 0.0


def test_qor_bounds_on_generated_instances():
    for s in range(8):
        y = V.qor_yes_instance(2, 2, s)
        assert V.qor_run(y.rho, y, 2 / 3).p_exact >= 4 / 63
        nn = V.qor_no_instance(2, 2, s)
        assert V.qor_run(nn.rho, nn, 2 / 3).p_exact <= 1 / 16


def test_qor_report_sampling_and_serialization():
    y = V.qor_yes_instance(2, 1, 3)
    rep = V.qor_run(y.rho, y, 2 / 3, seed=5, trials=2000)
    assert abs(rep.p_hat - rep.p_exact) <= rep.half_width
    d = rep.to_dict()
    assert set(d) >= {"verdict", "p_exact", "p_hat", "trials", "half_width", "seed"}
    back = V.QorInstance.from_dict(y.to_dict())
    np.testing.assert_array_equal(back.lambda_projector, y.lambda_projector)


def test_qor_rejects_non_projector():
    with pytest.raises(ValueError):
        V.QorInstance(np.eye(4) * 0.5, 1, 1)


def test_qma_to_qor_trivial_verifiers():
    acc = GateCircuit(3).add("X", 2)
    rej = GateCircuit(3).add("H", 0)
    psi = np.array([1, 0])
    r_acc = V.qma_to_qor(acc, 1, 1, psi, rounds=2)
    r_rej = V.qma_to_qor(rej, 1, 1, psi, rounds=2)
    assert V.best_single_acceptance(r_acc.instance.rho, r_acc.instance) == pytest.approx(1)
    assert V.best_single_acceptance(r_rej.instance.rho, r_rej.instance) == pytest.approx(0, abs=1e-12)


def test_qma_to_qor_witness_dependent_verifier():
    # accepts iff the witness qubit is |1⟩
    c = GateCircuit(3).add("CNOT", 1, 2)
    r = V.qma_to_qor(c, 1, 1, np.array([1, 0]), rounds=2)
    assert V.verifier_max_acceptance(c, 1, 1, np.array([1, 0])) == pytest.approx(1)
    assert V.qor_accept_probability(r.instance.rho, r.instance, 2 / 3) >= 4 / 63


# ---------------------------------------------------------------- LHwP

@pytest.mark.parametrize("m", [1, 2])
def test_lhwp_estimator_unbiased(m):
    yes, no, psi = H.clock_instance_pair(2, m, seed=m)
    for inst in (yes, no):
        w, v = np.linalg.eigh(H.assemble(inst, psi))
        eta = v[:, 0]
        rep = V.lhwp_verify(inst, psi, eta)
        K = rep.stats["K"]
        assert rep.stats["expected_estimator"] == pytest.approx(H.energy(inst, psi, eta) / K, abs=1e-10)


def test_lhwp_exact_acceptance_separates():
    yes, no, psi = H.clock_instance_pair(2, 1, seed=3)
    eta_y = H.history_state(yes.meta["verifier"], psi, PHI, 2, 1)
    _, v = np.linalg.eigh(H.assemble(no, psi))
    assert V.lhwp_verify(yes, psi, eta_y).p_exact > 0.9
    assert V.lhwp_verify(no, psi, v[:, 0]).p_exact < 0.3


def test_lhwp_sampled_is_reproducible():
    yes, _, psi = H.clock_instance_pair(2, 1, seed=4)
    eta = H.history_state(yes.meta["verifier"], psi, PHI, 2, 1)
    a = V.lhwp_verify(yes, psi, eta, seed=9, mode="sampled", trials=3)
    b = V.lhwp_verify(yes, psi, eta, seed=9, mode="sampled", trials=3)
    assert a.to_dict() == b.to_dict()
    with pytest.raises(ValueError):
        V.lhwp_verify(yes, psi, eta, mode="sampled")


# ---------------------------------------------------------------- LHwM

@pytest.mark.parametrize("m", [1, 2])
def test_lhwm_honest_sector_matches_step2(m):
    yes, _, _ = H.clock_instance_pair(1, m, 7, variant="mixed")
    rho = random_density(1, 3, rank=2).matrix
    wit = V.honest_mixed_witness(yes, PHI)
    rep = V.lhwm_verify(yes, rho, wit, 1 / math.sqrt(m + 1))
    np.testing.assert_allclose(rep.stats["sector_W_expectations"], rep.stats["sector_step2"], atol=1e-8)
    assert rep.stats["no_abort_probability"] > 0.99


def test_lhwm_abort_is_certain_under_deterministic_x():
    yes, _, _ = H.clock_instance_pair(1, 1, 7, variant="mixed")
    rho = random_density(1, 3, rank=2).matrix
    wit = V.identity_mixed_witness(yes, PHI)
    rep = V.lhwm_verify(yes, rho, wit, 0.5)
    nz = [p for p, lam in zip(rep.stats["sector_abort_probability"], rep.stats["sector_step2"]) if lam != 0]
    assert nz and all(p == pytest.approx(1.0) for p in nz)


# ---------------------------------------------------------------- amplification

def _tail(s, q, k):
    return sum(math.comb(s, j) * q**j * (1 - q) ** (s - j) for j in range(k, s + 1))


def test_amplification_tail_against_direct_sum():
    # base (a, a − 1/p) = (0.75, 0.5) and s = 32: accept iff at least 20 runs accept
    amp = V.amplify_parallel(np.diag([0.25, 0.75]), 0.75, 4.0, 32)
    assert amp.min_accepts == 20
    assert amp.product_acceptance(0.75) == pytest.approx(_tail(32, 0.75, 20), abs=1e-14)
    assert amp.iid_bound() == pytest.approx(_tail(32, 0.5, 20), abs=1e-14)
    gap = amp.product_acceptance(0.75) - amp.iid_bound()
    assert gap == pytest.approx(0.854585, abs=1e-6)


def test_entangled_witness_no_better_than_iid_bound():
    # no-instance: every single run accepts with probability at most a − 1/p = 0.5
    amp = V.amplify_parallel(np.diag([0.5, 0.2]), 0.75, 4.0, 2)
    epr = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert amp.acceptance(epr) == pytest.approx(0.5 * (0.25 + 0.04))
    assert amp.acceptance(epr) <= amp.iid_bound() + 1e-12
    for seed in range(10):
        w = haar_unitary(4, seed)[:, 0]
        assert amp.acceptance(w) <= amp.iid_bound() + 1e-12


def test_amplification_completeness_one_stays_one():
    amp = V.amplify_parallel(np.eye(2), 1.0, 4.0, 6)
    assert amp.acceptance(np.eye(64)[0]) == pytest.approx(1)


def test_amplification_sampling_agrees():
    amp = V.amplify_parallel(np.eye(2), 0.75, 2.0, 16)
    assert abs(amp.sample(0.7, 20000, 3) - amp.product_acceptance(0.7)) < 0.02


# ---------------------------------------------------------------- search to decision

def _onehot(n, idx, val=1.0):
    t = np.zeros(1 << n)
    t[idx] = val
    return t


def test_search_finds_unique_witness():
    t = _onehot(3, 0b101)
    res = V.search_to_decision(t, 1.0, 0.1, V.exact_prefix_oracle(t, 3, 1.0, 0.1, 0))
    assert res.witness == "101" and res.success and res.good_invariant


def test_search_all_accepting_returns_zeros():
    t = np.ones(8)
    assert V.search_to_decision(t, 1.0, 0.1, V.exact_prefix_oracle(t, 3, 1.0, 0.1, 0)).witness == "000"


def test_search_promise_violation():
    t = np.full(8, 0.2)
    with pytest.raises(V.PromiseViolation):
        V.search_to_decision(t, 0.9, 0.1, V.exact_prefix_oracle(t, 3, 0.9, 0.1, 0))
    res = V.search_to_decision(t, 0.9, 0.1, V.exact_prefix_oracle(t, 3, 0.9, 0.1, 0), strict=False)
    assert len(res.witness) == 3 and not res.promise_ok


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_search_on_random_verifiers(seed):
    v = V.random_witness_verifier(4, seed)
    table = V.classical_witness_acceptance(v, 1, 4, np.array([1, 0]))
    a = table.max()
    res = V.search_to_decision(table, a, 0.1, V.exact_prefix_oracle(table, 4, a, 0.1, seed))
    assert res.success and res.good_invariant


# ---------------------------------------------------------------- identification

def test_identify_single_candidate():
    v = np.array([1, 0, 0, 0], dtype=complex)
    res = V.identify_state(v, [(0, v)])
    assert res.index == 0 and res.success_probability == pytest.approx(1)


def test_identify_orthonormal_candidates_meets_bound():
    u = haar_unitary(8, 4)
    cands = [(j, u[:, j]) for j in range(8)]
    for t in (0, 5, 7):
        res = V.identify_state(u[:, t], cands, eps=1e-3, target=t)
        assert res.success_probability >= res.bound
        assert res.bound == pytest.approx(1 - 4 * 3 * 1e-3)
