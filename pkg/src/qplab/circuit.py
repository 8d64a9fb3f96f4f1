"""Gate circuits over a fixed elementary gate set."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .qcore import SCHEMA, apply_operator, embed

_S2 = 1 / np.sqrt(2)


def _perm_matrix(k: int, f) -> np.ndarray:
    d = 1 << k
    m = np.zeros((d, d), dtype=np.complex128)
    for i in range(d):
        m[f(i), i] = 1.0
    return m


def _cnot(i: int) -> int:
    return i ^ 2 if i & 1 else i


def _swap(i: int) -> int:
    return ((i & 1) << 1) | ((i >> 1) & 1)


def _toffoli(i: int) -> int:
    return i ^ 4 if (i & 3) == 3 else i


GATES: dict[str, np.ndarray] = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=np.complex128),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]).astype(np.complex128),
    "TDG": np.diag([1, np.exp(-1j * np.pi / 4)]).astype(np.complex128),
    "S": np.diag([1, 1j]).astype(np.complex128),
    "Z": np.diag([1, -1]).astype(np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "I": np.eye(2, dtype=np.complex128),
    # first listed qubit is the control (local bit 0)
    "CNOT": _perm_matrix(2, _cnot),
    "SWAP": _perm_matrix(2, _swap),
    "TOFFOLI": _perm_matrix(3, _toffoli),
}
GATE_ARITY = {name: int(m.shape[0]).bit_length() - 1 for name, m in GATES.items()}


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    params: dict | None = None

    def matrix(self) -> np.ndarray:
        if self.name == "U":
            return np.asarray(self.params["matrix"], dtype=np.complex128)
        return GATES[self.name]


@dataclass
class GateCircuit:
    """Ordered gate list on ``n_qubits`` qubits; gate 1 is applied first."""

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            self._validate(g)

    def _validate(self, g: Gate) -> None:
        if g.name != "U" and g.name not in GATES:
            raise ValueError(f"unknown gate {g.name!r}")
        k = GATE_ARITY.get(g.name)
        if g.name == "U":
            k = int(np.asarray(g.params["matrix"]).shape[0]).bit_length() - 1
        if len(g.qubits) != k or len(set(g.qubits)) != k:
            raise ValueError(f"gate {g.name} needs {k} distinct qubits")
        if any(q < 0 or q >= self.n_qubits for q in g.qubits):
            raise ValueError(f"gate {g.name} acts outside the register")

    def add(self, name: str, *qubits: int, matrix: np.ndarray | None = None) -> "GateCircuit":
        params = None if matrix is None else {"matrix": np.asarray(matrix, dtype=np.complex128)}
        g = Gate(name, tuple(int(q) for q in qubits), params)
        self._validate(g)
        self.gates.append(g)
        return self

    def __len__(self) -> int:
        return len(self.gates)

    def gate_unitary(self, t: int) -> np.ndarray:
        """Full-register matrix of gate ``t`` (0-based)."""
        g = self.gates[t]
        return embed(g.matrix(), g.qubits, self.n_qubits)

    def apply(self, psi: np.ndarray, upto: int | None = None) -> np.ndarray:
        """Run the first ``upto`` gates on a copy of ``psi``."""
        out = np.array(psi, dtype=np.complex128, copy=True)
        for g in self.gates[: len(self.gates) if upto is None else upto]:
            k = len(g.qubits)
            if k == 1:
                kernels.apply_1q(out, g.matrix(), g.qubits[0])
            elif k == 2:
                kernels.apply_2q(out, g.matrix(), g.qubits[0], g.qubits[1])
            else:
                out = apply_operator(out, g.matrix(), g.qubits, self.n_qubits)
        return out

    def unitary(self) -> np.ndarray:
        d = 1 << self.n_qubits
        u = np.eye(d, dtype=np.complex128)
        for t in range(len(self.gates)):
            u = self.gate_unitary(t) @ u
        return u

    def inverse(self) -> "GateCircuit":
        inv = GateCircuit(self.n_qubits)
        for g in reversed(self.gates):
            inv.add("U", *g.qubits, matrix=g.matrix().conj().T)
        return inv

    def to_dict(self) -> dict:
        gates = []
        for g in self.gates:
            entry: dict = {"name": g.name, "qubits": list(g.qubits)}
            if g.params:
                m = np.asarray(g.params["matrix"])
                entry["params"] = {"matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m]}
            gates.append(entry)
        return {"version": SCHEMA, "n_qubits": self.n_qubits, "gates": gates}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "GateCircuit":
        if "version" in data and data["version"] != SCHEMA:
            raise ValueError(f"schema version mismatch: {data['version']!r}")
        c = cls(int(data["n_qubits"]))
        for entry in data["gates"]:
            m = None
            if entry.get("params") and "matrix" in entry["params"]:
                a = np.asarray(entry["params"]["matrix"], dtype=np.float64)
                m = a[..., 0] + 1j * a[..., 1]
            c.add(entry["name"], *entry["qubits"], matrix=m)
        return c

    @classmethod
    def from_json(cls, text: str) -> "GateCircuit":
        return cls.from_dict(json.loads(text))


def circuit_from_ops(n_qubits: int, ops: Sequence[tuple]) -> GateCircuit:
    """Build from ``[(name, q0, q1, ...), ...]``."""
    c = GateCircuit(n_qubits)
    for op in ops:
        c.add(op[0], *op[1:])
    return c
