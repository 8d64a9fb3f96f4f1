import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qplab import crypto as C
from qplab.qcore import haar_unitary, haar_vector


def test_prs_overlaps_follow_hamming_distance():
    sch = C.make_prs_scheme(3, seed=1)
    states = sch.all_states()
    for i, j in itertools.combinations(range(8), 2):
        d = bin(i ^ j).count("1")
        assert abs(np.vdot(states[i], states[j])) ** 2 == pytest.approx(0.5**d, abs=1e-12)


def test_prs_round_trip_and_schema():
    sch = C.make_prs_scheme(4, seed=2)
    back = C.PrsScheme.from_dict(sch.to_dict())
    np.testing.assert_array_equal(back.all_states(), sch.all_states())
    with pytest.raises(ValueError, match="schema"):
        C.PrsScheme.from_dict({**sch.to_dict(), "version": "x"})
    assert sch.n_keys == 16


def test_prs_oracle_cases():
    sch = C.make_prs_scheme(4, seed=3)
    rng = np.random.default_rng(0)
    assert C.prs_oracle(sch, sch.state(5), rng)
    far = haar_vector(16, np.random.default_rng(1))
    assert C.max_key_overlap(sch, far)[1] < C.PRS_THRESHOLD
    assert not C.prs_oracle(sch, far, rng)


def test_prs_break_advantage():
    res = C.prs_oracle_break(C.make_prs_scheme(4, seed=4), 300, seed=5)
    assert res.advantage >= 0.5
    assert len(res.rows) == 300


def test_owsg_recovers_keys():
    ok = [C.owsg_break(C.make_prs_scheme(5, seed=s), s % 32, seed=s).success for s in range(20)]
    assert sum(ok) >= 19
    exact = C.owsg_break(C.make_prs_scheme(4, seed=9), 11, seed=1, shots=None)
    assert exact.success and exact.key == 11


@pytest.mark.parametrize("lam,k", [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)])
def test_hiding_is_perfect(lam, k):
    assert C.hiding_check(C.new_session(lam, k, seed=lam * 10 + k)) < 1e-10


def test_honest_reveals_and_phases():
    s = C.new_session(2, 2, seed=1)
    with pytest.raises(RuntimeError):
        s.reveal(0)
    s.commit(1)
    with pytest.raises(RuntimeError):
        s.commit(0)
    assert s.reveal(1) == pytest.approx(1)
    with pytest.raises(RuntimeError):
        s.reveal(1)
    s0 = C.new_session(2, 2, seed=1)
    s0.commit(0)
    assert s0.reveal(0) == pytest.approx(1)


def test_binding_values_examples():
    s = C.new_session(2, 1, seed=5)
    ident = C.binding_game_values(s, np.eye(4))
    assert ident.v10 == pytest.approx(abs(np.vdot(C.epr(2), s.aux)), abs=1e-12)
    informed = C.binding_game_values(s, s.T.conj().T)
    assert informed.v10 == pytest.approx(1, abs=1e-12)


def test_v01_matches_swap_formula_for_product_adversary():
    # U = I on R: v01² = Π_j (½ + ½|⟨ψ|EPR⟩|²)
    for k in (1, 2):
        s = C.new_session(1, k, seed=7)
        v = C.binding_game_values(s, np.eye(2**k)).v01
        ov = abs(np.vdot(s.aux, C.epr(1))) ** 2
        assert v**2 == pytest.approx((0.5 + 0.5 * ov) ** k, abs=1e-12)


def test_r_only_adversary_with_advice():
    s = C.new_session(1, 2, seed=3)
    eta = np.array([1, 0])
    v = C.binding_game_values(s, haar_unitary(8, 3), eta=eta)
    assert 0 <= v.v01 <= 1 and 0 <= v.v10 <= 1


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10**6))
def test_half_state_r_only_fidelity(lam, seed):
    d = 1 << lam
    half = C.half_state(lam, haar_unitary(d, seed), haar_unitary(d, seed + 1))
    f2 = C.r_only_epr_fidelity_sq(half, lam)
    assert f2 == pytest.approx(0.5, abs=1e-10)
    # no unitary on R beats the Uhlmann value
    u = haar_unitary(d, seed + 2)
    m = half.reshape(d, d) @ u.T
    assert abs(np.vdot(C.epr(lam), m.reshape(-1))) ** 2 <= f2 + 1e-10
