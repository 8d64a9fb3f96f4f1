"""Acceptance criteria 1–10, one test each; a summary line per criterion is printed at the end."""
import math
import time

import numpy as np
import pytest

from qplab import crypto as C
from qplab import hamlab as H
from qplab import proto as P
from qplab import verify as V
from qplab.qcore import haar_state, haar_unitary, metric_property_suite, random_density
from qplab.qprim import hoeffding_half_width, sequential_measure, swap_test

PHI = np.array([1, 0], dtype=complex)


def _finish(record, n, ok, detail):
    record(n, ok, detail)
    assert ok, detail


def test_c01_swap_test_law(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst_exact, mc_fail = 0.0, 0
    band = hoeffding_half_width(10**4, 1e-3)
    for i in range(200):
        n = 1 + i % 3
        a = haar_state(n, rng).amplitudes
        sig = random_density(n, rng).matrix
        expected = 0.5 + 0.5 * float(np.real(np.vdot(a, sig @ a)))
        dist = swap_test(a, sig)
        worst_exact = max(worst_exact, abs(dist.prob(0) - expected))
        shots = dist.sample(rng, 10**4)
        freq = sum(1 for s in shots if s == 0) / 10**4
        mc_fail += abs(freq - expected) > band
    elapsed = time.perf_counter() - t0
    ok = worst_exact <= 1e-10 and mc_fail == 0 and elapsed < 10
    _finish(record, 1, ok, f"max exact err {worst_exact:.2e}, MC outside band {mc_fail}/200, {elapsed:.1f}s")


def test_c02_quantum_or_bounds(record):
    t0 = time.perf_counter()
    shapes = [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2), (3, 2), (4, 2)]
    yes_min, no_max = 1.0, 0.0
    for i in range(50):
        n, m = shapes[i % len(shapes)]
        assert n + m <= 8
        y = V.qor_yes_instance(n, m, 1000 + i, eta=2 / 3)
        yes_min = min(yes_min, V.qor_accept_probability(y.rho, y, 2 / 3))
        delta = 1 / (64 * 2**m)
        nn = V.qor_no_instance(n, m, 2000 + i, delta=delta)
        assert V.best_single_acceptance(nn.rho, nn) <= delta
        no_max = max(no_max, V.qor_accept_probability(nn.rho, nn, 2 / 3))
    elapsed = time.perf_counter() - t0
    ok = yes_min >= 4 / 63 and no_max <= 1 / 16 and elapsed < 120
    _finish(record, 2, ok, f"min yes {yes_min:.4f} >= 4/63, max no {no_max:.4f} <= 1/16, {elapsed:.1f}s")


def _clock_instances():
    out = []
    for i in range(20):
        m = 1 + i % 3
        yes, no, psi = H.clock_instance_pair(2, m, 300 + i)
        out.append((m, yes, no, psi))
    return out


def test_c03_cook_levin_gap(record):
    t0 = time.perf_counter()
    worst_yes, worst_no, gaps_ok = -1.0, 1.0, True
    for m, yes, no, psi in _clock_instances():
        eta = H.history_state(yes.meta["verifier"], psi, PHI, 2, 1)
        worst_yes = max(worst_yes, H.energy(yes, psi, eta) - yes.a)
        # b from the path-graph spectrum, not from the instance itself
        b = 1 - math.cos(math.pi / (2 * m + 3)) - 1e-12
        lam = H.exact_min_energy(no, psi)
        worst_no = min(worst_no, lam - b)
        gaps_ok &= b - yes.a > 2 / yes.p and yes.term_count() <= yes.p
    elapsed = time.perf_counter() - t0
    ok = worst_yes <= 0 and worst_no >= 0 and gaps_ok and elapsed < 300
    _finish(record, 3, ok, f"max E_hist - a {worst_yes:.2e}, min lambda_min - b {worst_no:.2e}, "
            f"b-a>2/p {gaps_ok}, {elapsed:.1f}s")


def test_c04_lhwp_unbiased_and_separating(record):
    worst = 0.0
    acc_yes, acc_no = [], []
    for i, (m, yes, no, psi) in enumerate(_clock_instances()):
        eta = H.history_state(yes.meta["verifier"], psi, PHI, 2, 1)
        rep = V.lhwp_verify(yes, psi, eta)
        target = H.energy(yes, psi, eta) / yes.term_count()
        worst = max(worst, abs(rep.stats["expected_estimator"] - target))
        sy = V.lhwp_verify(yes, psi, eta, seed=10 + i, mode="sampled", rounds=400, trials=20)
        _, v = np.linalg.eigh(H.assemble(no, psi))
        sn = V.lhwp_verify(no, psi, v[:, 0], seed=50 + i, mode="sampled", rounds=400, trials=20)
        acc_yes.append(sy.p_hat)
        acc_no.append(sn.p_hat)
    gap = float(np.mean(acc_yes) - np.mean(acc_no))
    ok = worst <= 1e-8 and gap >= 0.3
    _finish(record, 4, ok, f"max |E[est] - <H>/K| {worst:.2e}, sampled accept yes {np.mean(acc_yes):.3f} "
            f"no {np.mean(acc_no):.3f} gap {gap:.3f}")


def test_c05_lhwm_step2_and_abort(record):
    worst, abort_ok = 0.0, True
    for m in (1, 2):
        for s in range(3):
            yes, _, _ = H.clock_instance_pair(1, m, 40 + s, variant="mixed")
            rho = random_density(1, 60 + s, rank=2).matrix
            assert np.linalg.matrix_rank(rho) == 2
            rep = V.lhwm_verify(yes, rho, V.honest_mixed_witness(yes, PHI), 1 / math.sqrt(m + 1))
            diff = np.abs(np.array(rep.stats["sector_W_expectations"]) - np.array(rep.stats["sector_step2"]))
            worst = max(worst, float(diff.max()))
            wit = V.identity_mixed_witness(yes, PHI)
            _, sectors = V.lhwm_laws(yes, rho, wit)
            for sec in sectors:
                if sec.eigenvalue == 0:
                    continue
                assert np.isclose(np.max(sec.x_law), 1.0)  # X is deterministic
                alpha = float(np.clip(sec.x_mean - 0.5 * np.sign(sec.x_mean or 1), -1, 1))
                r = V.lhwm_verify(yes, rho, wit, alpha)
                probs = [p for p, lam in zip(r.stats["sector_abort_probability"], r.stats["sector_step2"]) if lam != 0]
                abort_ok &= all(abs(p - 1) < 1e-12 for p in probs)
    ok = worst <= 1e-8 and abort_ok
    _finish(record, 5, ok, f"max |W - step2| {worst:.2e}, abort certain at deviation 0.5: {abort_ok}")


def test_c06_quantum_union_bound(record):
    rng = np.random.default_rng(6)
    fails = 0
    for _ in range(100):
        n = int(rng.integers(1, 4))
        d = 1 << n
        t = haar_state(n, rng).amplitudes
        projs = []
        for _ in range(int(rng.integers(1, 7))):
            w = rng.normal(size=d) + 1j * rng.normal(size=d)
            w -= np.vdot(t, w) * t
            w = w / np.linalg.norm(w) + 0.15 * rng.random() * t
            w /= np.linalg.norm(w)
            projs.append(np.eye(d) - np.outer(w, w.conj()))
        res = sequential_measure(np.outer(t, t.conj()), projs)
        eps = sum(res.eps)
        fails += not (res.accept_probability >= 1 - 4 * eps - 1e-12 and res.disturbance <= math.sqrt(eps) + 1e-8)
    _finish(record, 6, fails == 0, f"violations {fails}/100")


def test_c07_search_to_decision(record):
    n, eps = 6, 1 / 6
    ok_count, good_all = 0, True
    for s in range(200):
        v = V.random_witness_verifier(n, 7000 + s)
        table = V.classical_witness_acceptance(v, 1, n, PHI)
        a = float(table.max())
        res = V.search_to_decision(table, a, eps, V.exact_prefix_oracle(table, n, a, eps, s))
        ok_count += res.acceptance >= a - eps - 1e-12
        good_all &= res.good_invariant
    rate = ok_count / 200
    _finish(record, 7, rate >= 0.95 and good_all, f"success {rate:.3f} (eps = 1/6), Good invariant held: {good_all}")


def test_c08_protocol_numbers(record):
    mix = P.mixedness_protocol(np.eye(2) / 2, 16, P.helstrom_prover()).p_exact
    tail = sum(math.comb(16, j) for j in range(10, 17)) / 2**16
    me_yes = P.max_entangled_protocol(P.epr_state(1), 8, P.uhlmann_prover()).p_exact
    me_no = P.max_entangled_protocol(np.array([1, 0, 0, 0]), 1, P.uhlmann_prover()).stats["per_round_pass"]
    pc = P.public_coin_cheat_value(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])).value
    z, o = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    efi = P.efi_protocol(z, z, z, o, 12, P.helstrom_prover()).p_exact
    ok = (abs(mix - tail) < 1e-12 and round(mix, 6) == 0.227249 and me_yes == pytest.approx(1, abs=1e-12)
          and me_no <= 7 / 8 and abs(pc - 0.75) <= 1e-8 and efi == 2.0**-12)
    _finish(record, 8, ok, f"mixedness t=16 {mix:.9f}, maxent yes {me_yes:.6f} no/round {me_no:.4f}, "
            f"public-coin cheat {pc:.10f}, EFI no-case {efi:.3e}")


def test_c09_crypto_games(record):
    rng = np.random.default_rng(9)
    worst_hide = 0.0
    for i in range(50):
        lam, k = 1 + i % 3, 1 + (i // 3) % 2
        s = C.CommitmentSession(lam, k, haar_unitary(1 << lam, rng))
        worst_hide = max(worst_hide, C.hiding_check(s))
    worst_half = 0.0
    for lam in (1, 2, 3):
        for j in range(5):
            d = 1 << lam
            h = C.half_state(lam, haar_unitary(d, rng), haar_unitary(d, rng))
            worst_half = max(worst_half, C.r_only_epr_fidelity_sq(h, lam))
    adv = C.prs_oracle_break(C.make_prs_scheme(4, seed=91), 1000, seed=92).advantage
    wins = sum(C.owsg_break(C.make_prs_scheme(6, seed=100 + t), int(rng.integers(64)), seed=200 + t).success
               for t in range(200))
    ok = worst_hide <= 1e-10 and worst_half <= 0.75 + 1e-8 and adv >= 0.5 and wins / 200 >= 0.95
    _finish(record, 9, ok, f"hiding TD {worst_hide:.1e}, HALF R-only F^2 {worst_half:.6f}, "
            f"PRS advantage {adv:.3f}, OWSG recovery {wins}/200")


def test_c10_metric_properties(record):
    checks = metric_property_suite(500, 10, tol=1e-8)
    ok = all(c.passed for c in checks)
    _finish(record, 10, ok, ", ".join(f"{c.name} {c.instances - c.failures}/{c.instances}" for c in checks))
