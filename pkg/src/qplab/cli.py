"""Command-line experiment runner.

Every command prints (or writes with ``--out``) a JSON report that embeds the
resolved configuration. Trial-based commands also write a CSV with ``--csv``.
Exit codes: 0 success, 1 I/O, parse or configuration error, 2 promise violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from . import crypto, hamlab, proto, verify
from ._rng import make_rng
from .circuit import GateCircuit
from .kernels import BACKEND
from .qcore import (
    SCHEMA,
    DimensionError,
    decode_complex,
    encode_matrix,
    haar_unitary,
    haar_vector,
    metric_property_suite,
    random_density,
)

CSV_COLUMNS = ("seed", "case", "oracle_verdict", "advantage")


class UsageError(Exception):
    """Bad configuration; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which is reserved for promise violations
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


# ---------------------------------------------------------------- formatting

def _fmt(x: Any) -> Any:
    """Round floats to 12 significant digits, recursively."""
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if not math.isfinite(v) else float(f"{v:.12g}")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _fmt(x.tolist())
    if isinstance(x, dict):
        return {str(k): _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    return x


def _cell(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return "%.12g" % float(x)
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return str(x)


def _config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _emit(args: argparse.Namespace, result: dict, stdout: bool = False) -> None:
    report = {"version": SCHEMA, "config": _fmt(_config(args)), "result": _fmt(result)}
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None) and not stdout:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_csv(path: str | None, rows: Sequence[Sequence[Any]]) -> None:
    if not path:
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_cell(c) for c in r])
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def _write_file(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(payload, sort_keys=True) + "\n")


def _read_json(path: str) -> dict:
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}:1:1: expected a JSON object")
    if data.get("version") != SCHEMA:
        raise UsageError(f"{path}: schema version mismatch: {data.get('version')!r} (expected {SCHEMA!r})")
    return data


# ---------------------------------------------------------------- seeds and jobs

def _seed(args: argparse.Namespace, required: bool = True) -> int | None:
    if args.seed is None and os.environ.get("QPLAB_SEED"):
        try:
            args.seed = int(os.environ["QPLAB_SEED"])
        except ValueError:
            raise UsageError("QPLAB_SEED must be an integer") from None
    if args.seed is None and (required or getattr(args, "mode", "exact") == "sampled"):
        raise UsageError("a seed is required (--seed or QPLAB_SEED)")
    if args.seed is not None and not 0 <= args.seed < 1 << 64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    return args.seed


def trial_seeds(seed: int, n: int) -> list[int]:
    """Per-trial integer seeds, independent of the worker count."""
    if n == 0:
        return []
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n, dtype=np.uint64)]


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _fraction(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _positive(text: str) -> float:
    v = _fraction(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


# ---------------------------------------------------------------- gen

def _gen_cooklevin(args) -> dict:
    seed = _seed(args)
    rng = make_rng(seed)
    if args.variant == "mixed":
        psi = random_density(args.n_input, rng, rank=min(2, 1 << args.n_input)).matrix
    else:
        psi = haar_vector(1 << args.n_input, rng)
    yes, no, psi = hamlab.clock_instance_pair(args.n_input, args.m, rng, n=args.n, variant=args.variant, psi=psi)
    inst = yes if args.accepting else no
    payload = {
        "version": SCHEMA,
        "kind": "cooklevin",
        "accepting": bool(args.accepting),
        "n_input": args.n_input,
        "n": args.n if args.n is not None else args.n_input,
        "m": args.m,
        "variant": args.variant,
        "seed": seed,
        "verifier": inst.meta["verifier"].to_dict(),
        "instance": inst.to_dict(),
        "input": encode_matrix(psi),
    }
    _write_file(args.out, payload)
    return {"file": args.out, "kind": "cooklevin", "a": inst.a, "b": inst.b, "p": inst.p,
            "gap": inst.b - inst.a, "promise_violations": inst.promise_violations()}


def load_cooklevin(path: str) -> tuple[hamlab.HamiltonianInstance, np.ndarray, dict]:
    """Rebuild a clock instance from its verifier and check it against the stored terms."""
    data = _read_json(path)
    if data.get("kind") != "cooklevin":
        raise UsageError(f"{path}: expected a cooklevin instance, got {data.get('kind')!r}")
    stored = hamlab.HamiltonianInstance.from_dict(data["instance"])
    verifier = GateCircuit.from_dict(data["verifier"])
    inst = hamlab.cook_levin(verifier, data["n_input"], 1, data["n"], b=stored.b, p=stored.p, variant=data["variant"])
    pairs = list(zip(inst.plain_terms + inst.coupled_terms, stored.plain_terms + stored.coupled_terms))
    same = len(inst.plain_terms) == len(stored.plain_terms) and len(inst.coupled_terms) == len(stored.coupled_terms)
    if not same or any(x.qubits != y.qubits or not np.array_equal(x.matrix, y.matrix) for x, y in pairs):
        raise UsageError(f"{path}: stored terms do not match the stored verifier")
    return inst, decode_complex(data["input"]), data


def _gen_qor(args) -> dict:
    seed = _seed(args)
    if args.case == "yes":
        inst = verify.qor_yes_instance(args.n, args.m, seed, eta=args.eta)
    else:
        inst = verify.qor_no_instance(args.n, args.m, seed)
    _write_file(args.out, inst.to_dict())
    return {"file": args.out, "kind": "qor", "case": args.case,
            "best_single_acceptance": verify.best_single_acceptance(inst.rho, inst)}


def _gen_prs(args) -> dict:
    seed = _seed(args)
    scheme = crypto.make_prs_scheme(args.key_bits, seed, n_qubits=args.n_qubits)
    _write_file(args.out, scheme.to_dict())
    return {"file": args.out, "kind": "prs", "keys": scheme.n_keys, "n_qubits": scheme.n_qubits}


def cmd_gen(args) -> int:
    fn = {"cooklevin": _gen_cooklevin, "qor": _gen_qor, "prs": _gen_prs}[args.kind]
    res = fn(args)
    _emit(args, res, stdout=True)
    return 2 if res.get("promise_violations") else 0


# ---------------------------------------------------------------- verifiers

def cmd_qor(args) -> int:
    _seed(args, required=False)
    data = _read_json(args.instance)
    inst = verify.QorInstance.from_dict(data)
    if inst.rho is None:
        raise UsageError(f"{args.instance}: the instance carries no input state")
    delta = args.delta if args.delta is not None else 1.0 / (64 * inst.N)
    best = verify.best_single_acceptance(inst.rho, inst)
    trials = args.trials if args.mode == "sampled" else 0
    rep = verify.qor_run(inst.rho, inst, args.eta, delta=delta, seed=args.seed, trials=trials)
    _emit(args, {"report": rep.to_dict(), "best_single_acceptance": best})
    if delta < best < args.eta:
        sys.stderr.write(f"promise violated: best single acceptance {best:.6g} lies in ({delta:.6g}, {args.eta:.6g})\n")
        return 2
    return 0


def _ground_witness(inst, psi) -> np.ndarray:
    _, v = np.linalg.eigh(hamlab.assemble(inst, psi))
    return v[:, 0]


def cmd_lhwp(args) -> int:
    _seed(args, required=False)
    inst, psi, data = load_cooklevin(args.instance)
    if inst.variant != "pure":
        raise UsageError("lhwp needs a pure-input instance")
    viol = inst.promise_violations()
    eta = _ground_witness(inst, psi)
    rep = verify.lhwp_verify(inst, psi, eta, seed=args.seed, mode=args.mode, rounds=args.rounds, trials=args.trials)
    _emit(args, {"report": rep.to_dict(), "promise_violations": viol, "accepting": data["accepting"]})
    return 2 if viol else 0


def cmd_lhwm(args) -> int:
    _seed(args, required=False)
    inst, rho, data = load_cooklevin(args.instance)
    if inst.variant != "mixed":
        raise UsageError("lhwm needs a mixed-input instance (gen cooklevin --variant mixed)")
    viol = inst.promise_violations()
    phi = np.array([1, 0], dtype=np.complex128)
    wit = (verify.honest_mixed_witness if args.witness == "honest" else verify.identity_mixed_witness)(inst, phi)
    alpha = args.alpha
    if alpha is None:
        _, sectors = verify.lhwm_laws(inst, rho, wit)
        nz = [s for s in sectors if s.eigenvalue != 0.0]
        alpha = float(np.clip(nz[0].x_mean if nz else 0.0, -1, 1))
    rep = verify.lhwm_verify(inst, rho, wit, alpha, seed=args.seed, mode=args.mode,
                             rounds=args.rounds, block=args.block, trials=args.trials)
    _emit(args, {"report": rep.to_dict(), "alpha_prover": alpha, "promise_violations": viol,
                 "accepting": data["accepting"]})
    return 2 if viol else 0


def cmd_amplify(args) -> int:
    seed = _seed(args, required=False)
    e = np.diag([1 - args.q, args.q])
    amp = verify.amplify_parallel(e, args.a, args.p, args.s)
    out = {"threshold": amp.threshold, "min_accepts": amp.min_accepts,
           "p_exact": amp.product_acceptance(args.q), "iid_bound": amp.iid_bound(),
           "completeness": amp.product_acceptance(args.a)}
    if args.mode == "sampled":
        out["p_hat"] = amp.sample(args.q, args.trials, seed)
        out["trials"] = args.trials
    _emit(args, out)
    return 0


def _stod_trial(task) -> tuple:
    s, n_witness, eps, shots = task
    rng = make_rng(s)
    v = verify.random_witness_verifier(n_witness, rng)
    table = verify.classical_witness_acceptance(v, 1, n_witness, np.array([1, 0]))
    a = float(table.max())
    oracle = (verify.exact_prefix_oracle(table, n_witness, a, eps, rng) if shots is None
              else verify.sampled_prefix_oracle(table, n_witness, a, eps, shots, rng))
    res = verify.search_to_decision(table, a, eps, oracle)
    return s, res.success, res.good_invariant, res.acceptance, a


def cmd_stod(args) -> int:
    seed = _seed(args)
    shots = args.shots if args.mode == "sampled" else None
    tasks = [(s, args.n_witness, args.eps, shots) for s in trial_seeds(seed, args.trials)]
    results = _map(_stod_trial, tasks, args.jobs)
    rows, ok = [], 0
    for i, (s, success, good, acc, a) in enumerate(results):
        ok += int(success)
        rows.append((s, "stod", success, ok / (i + 1)))
    _write_csv(args.csv, rows)
    _emit(args, {"success_rate": ok / max(1, len(results)),
                 "good_invariant_rate": sum(r[2] for r in results) / max(1, len(results)),
                 "trials": len(results)})
    return 0


def cmd_identify(args) -> int:
    seed = _seed(args)
    rng = make_rng(seed)
    d = 1 << args.qubits
    if args.candidates > d:
        raise UsageError("more candidates than dimensions")
    u = haar_unitary(d, rng)
    cands = [(j, u[:, j]) for j in range(args.candidates)]
    target = int(rng.integers(0, args.candidates))
    res = verify.identify_state(cands[target][1], cands, eps=args.eps, seed=rng, target=target)
    _emit(args, {"target": target, "index": res.index, "success_probability": res.success_probability,
                 "bound": res.bound, "queries": res.queries})
    return 0


# ---------------------------------------------------------------- protocols

def _random_circuit(n: int, rng, depth: int = 3) -> GateCircuit:
    c = GateCircuit(n)
    for _ in range(depth):
        for q in range(n):
            c.add("U", q, matrix=haar_unitary(2, rng))
        for q in range(n - 1):
            c.add("CNOT", q, q + 1)
    return c


def cmd_protocol(args) -> int:
    seed = _seed(args, required=False)
    sampled_seed = seed if args.mode == "sampled" else None
    pid = args.protocol
    if pid == "mixedness":
        rho = np.eye(2) / 2 if args.no_case else np.diag([1.0, 0.0])
        tr = proto.mixedness_protocol(rho, args.t, proto.helstrom_prover(), seed=sampled_seed)
    elif pid == "maxent":
        d = 1 << args.qubits
        phi = np.eye(d).reshape(-1) / np.sqrt(d) if not args.no_case else np.eye(d * d)[0]
        tr = proto.max_entangled_protocol(phi, args.t, proto.uhlmann_prover(), seed=sampled_seed)
    elif pid in ("coqsdwp", "publiccoin"):
        if seed is None:
            raise UsageError("random circuits need a seed (--seed or QPLAB_SEED)")
        rng = make_rng(seed)
        q0 = _random_circuit(args.qubits, rng)
        q1 = q0 if args.no_case else _random_circuit(args.qubits, rng)
        phi = np.eye(1 << args.qubits)[0]
        outq = list(range(args.output_qubits))
        if pid == "coqsdwp":
            pol = proto.Polarization(*args.polarize) if args.polarize else None
            tr = proto.coqsdwp_protocol(phi, q0, q1, outq, proto.uhlmann_prover(), polarize=pol, seed=sampled_seed)
        else:
            tr = proto.public_coin_qsd(phi, q0, q1, outq, proto.public_coin_honest_prover(), seed=sampled_seed)
    else:
        rho0, rho1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
        if args.no_case:
            rho_a = rho_b = rho0
        else:
            rho_a, rho_b = rho0, rho1
        tr = proto.efi_protocol(rho_a, rho_b, rho0, rho1, args.t, proto.helstrom_prover(), seed=sampled_seed)
    _emit(args, {"transcript": tr.to_dict()})
    return 0


# ---------------------------------------------------------------- crypto

def _owsg_trial(task) -> tuple:
    s, key_bits, eps, shots = task
    rng = make_rng(s)
    scheme = crypto.make_prs_scheme(key_bits, int(rng.integers(0, 1 << 62)))
    key = int(rng.integers(0, scheme.n_keys))
    r = crypto.owsg_break(scheme, key, rng, eps=eps, shots=shots)
    return s, r.success, r.key == r.true_key, r.acceptance


def cmd_crypto(args) -> int:
    seed = _seed(args)
    game = args.game
    if game == "prs":
        scheme = (crypto.PrsScheme.from_dict(_read_json(args.scheme)) if args.scheme
                  else crypto.make_prs_scheme(args.key_bits, seed))
        res = crypto.prs_oracle_break(scheme, args.trials, seed)
        rows = [(seed, case, verdict, adv) for _, case, verdict, adv in res.rows]
        _write_csv(args.csv, rows)
        _emit(args, {"advantage": res.advantage, "trials": res.trials, "keys": scheme.n_keys})
        return 0
    if game == "owsg":
        shots = args.shots if args.mode == "sampled" else None
        tasks = [(s, args.key_bits, args.eps, shots) for s in trial_seeds(seed, args.trials)]
        results = _map(_owsg_trial, tasks, args.jobs)
        rows, ok = [], 0
        for i, (s, success, exact, _) in enumerate(results):
            ok += int(success)
            rows.append((s, "owsg", success, ok / (i + 1)))
        _write_csv(args.csv, rows)
        n = max(1, len(results))
        _emit(args, {"success_rate": ok / n, "exact_key_rate": sum(r[2] for r in results) / n,
                     "trials": len(results)})
        return 0
    sess = crypto.new_session(args.lam, args.k, seed)
    rng = make_rng(seed)
    d = 1 << args.lam
    half = crypto.half_state(args.lam, haar_unitary(d, rng), haar_unitary(d, rng))
    ident = crypto.binding_game_values(sess, np.eye(d**args.k))
    adv = np.kron(*([sess.T.conj().T] * args.k)) if args.k > 1 else sess.T.conj().T
    informed = crypto.binding_game_values(sess, adv)
    s0 = crypto.new_session(args.lam, args.k, seed)
    s0.commit(0)
    s1 = crypto.new_session(args.lam, args.k, seed)
    s1.commit(1)
    _emit(args, {
        "hiding_trace_distance": crypto.hiding_check(sess),
        "binding_identity_adversary": {"v01": ident.v01, "v10": ident.v10},
        "binding_T_aware_adversary": {"v01": informed.v01, "v10": informed.v10},
        "half_r_only_fidelity_sq": crypto.r_only_epr_fidelity_sq(half, args.lam),
        "honest_reveal": {"0": s0.reveal(0), "1": s1.reveal(1)},
    })
    return 0


def cmd_metrics(args) -> int:
    seed = _seed(args)
    checks = metric_property_suite(args.trials, seed, n_qubits=args.qubits, tol=args.tol)
    _emit(args, {"backend": BACKEND, "checks": [
        {"name": c.name, "instances": c.instances, "failures": c.failures, "worst_margin": c.worst_margin, "passed": c.passed}
        for c in checks]})
    return 0 if all(c.passed for c in checks) else 2


# ---------------------------------------------------------------- parser

def _common(p: argparse.ArgumentParser, mode: bool = True, trials: int | None = None) -> None:
    p.add_argument("--seed", type=int, default=None, help="64-bit seed (falls back to QPLAB_SEED)")
    p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    if mode:
        p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    if trials is not None:
        p.add_argument("--trials", type=int, default=trials)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="qplab", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate instance files")
    gs = g.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    c = gs.add_parser("cooklevin", help="clock-Hamiltonian instance")
    c.add_argument("--accepting", action="store_true")
    c.add_argument("--m", type=int, default=2)
    c.add_argument("--n-input", type=int, default=2)
    c.add_argument("--n", type=int, default=None, help="completeness parameter (default: n-input)")
    c.add_argument("--variant", choices=("pure", "mixed"), default="pure")
    q = gs.add_parser("qor", help="Quantum-OR instance")
    q.add_argument("--case", choices=("yes", "no"), default="yes")
    q.add_argument("--n", type=int, default=2)
    q.add_argument("--m", type=int, default=2)
    q.add_argument("--eta", type=_fraction, default=2 / 3)
    r = gs.add_parser("prs", help="keyed-state scheme")
    r.add_argument("--key-bits", type=int, default=4)
    r.add_argument("--n-qubits", type=int, default=None)
    for p in (c, q, r):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", required=True, help="instance file to write")
    g.set_defaults(func=cmd_gen)

    p = sub.add_parser("qor", help="Quantum-OR verifier")
    _common(p, trials=1000)
    p.add_argument("--instance", required=True)
    p.add_argument("--eta", type=_fraction, default=2 / 3)
    p.add_argument("--delta", type=_positive, default=None)
    p.set_defaults(func=cmd_qor)

    p = sub.add_parser("lhwp", help="pure-input local Hamiltonian verifier")
    _common(p, trials=1)
    p.add_argument("--instance", required=True)
    p.add_argument("--rounds", type=int, default=400)
    p.set_defaults(func=cmd_lhwp)

    p = sub.add_parser("lhwm", help="mixed-input local Hamiltonian verifier")
    _common(p, trials=1)
    p.add_argument("--instance", required=True)
    p.add_argument("--witness", choices=("honest", "identity"), default="honest")
    p.add_argument("--alpha", type=_fraction, default=None, help="prover's claimed overlap (default: honest value)")
    p.add_argument("--rounds", type=int, default=400)
    p.add_argument("--block", type=int, default=200)
    p.set_defaults(func=cmd_lhwm)

    p = sub.add_parser("amplify", help="parallel threshold amplification")
    _common(p, trials=10000)
    p.add_argument("--a", type=_fraction, default=0.75)
    p.add_argument("--p", type=_fraction, default=2.0)
    p.add_argument("--s", type=int, default=32)
    p.add_argument("--q", type=_fraction, default=0.75, help="per-run acceptance")
    p.set_defaults(func=cmd_amplify)

    p = sub.add_parser("stod", help="search-to-decision witness recovery")
    _common(p, trials=200)
    p.add_argument("--n-witness", type=int, default=6)
    p.add_argument("--eps", type=_positive, default=0.1)
    p.add_argument("--shots", type=int, default=4000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_stod)

    p = sub.add_parser("identify", help="binary-search state identification")
    _common(p, mode=False)
    p.add_argument("--qubits", type=int, default=3)
    p.add_argument("--candidates", type=int, default=8)
    p.add_argument("--eps", type=_fraction, default=1e-3)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("protocol", help="interactive protocols")
    p.add_argument("protocol", choices=("mixedness", "maxent", "coqsdwp", "publiccoin", "efi"))
    _common(p)
    p.add_argument("--no-case", action="store_true")
    p.add_argument("--t", type=int, default=16)
    p.add_argument("--qubits", type=int, default=2)
    p.add_argument("--output-qubits", type=int, default=1)
    p.add_argument("--polarize", type=int, nargs=3, metavar=("L", "R", "L2"), default=None)
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("crypto", help="cryptographic games")
    p.add_argument("game", choices=("prs", "owsg", "commit"))
    _common(p, trials=1000)
    p.add_argument("--key-bits", type=int, default=4)
    p.add_argument("--scheme", default=None, help="scheme file from 'gen prs'")
    p.add_argument("--eps", type=_positive, default=1 / 3)
    p.add_argument("--shots", type=int, default=200)
    p.add_argument("--lam", type=int, default=2)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_crypto)

    p = sub.add_parser("metrics", help="distance-measure property suite")
    _common(p, mode=False, trials=500)
    p.add_argument("--qubits", type=int, default=2)
    p.add_argument("--tol", type=_positive, default=1e-8)
    p.set_defaults(func=cmd_metrics)
    return top


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args))
    except verify.PromiseViolation as e:
        sys.stderr.write(f"promise violation: {e}\n")
        return 2
    except UsageError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    except (OSError, KeyError, DimensionError, ValueError) as e:
        sys.stderr.write(f"error: {type(e).__name__}: {e}\n")
        return 1


def main(argv: Sequence[str] | None = None) -> None:
    raise SystemExit(run(argv))


if __name__ == "__main__":
    main()
