"""Single deferred-measurement circuit for the whole protocol, its exact
simulation, and OpenQASM 3 export/import.

Hardware constraint honored throughout: no mid-circuit measurement. Every
measurement basis is rotated onto the Z basis, outcome-conditioned Pauli
fixes become controlled gates from the rotated qubits, and only the two
output qubits are measured, at the very end.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import bases
from .protocol import ProtocolInputs, all_selectors, alice_correction, bob_correction
from .qcore import QuantumError, StateVector, UnitaryGate, apply_unitary, basis_state, reduced_density

# q0..q9 in circuit order
QUBIT_LABELS = ("A0", "m1", "m2", "A1", "A2", "m3", "m4", "B1", "B2", "C")
OUT_RSP = QUBIT_LABELS.index("A2")   # q4, carries the remotely prepared state
OUT_TP = QUBIT_LABELS.index("B1")    # q7, carries the teleported state

_STD_GATES = {
    "h": bases.H, "x": bases.X, "z": bases.Z,
    "cx": bases.CNOT, "cz": bases.CZ, "ccx": bases.TOFFOLI,
}


@dataclass(frozen=True)
class CircuitOp:
    name: str
    qubits: tuple[int, ...]
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if self.name == "u":
            if self.matrix is None or len(self.qubits) != 1:
                raise QuantumError("custom 'u' ops carry a 2x2 matrix on one qubit")
        elif self.name in _STD_GATES:
            if len(self.qubits) != _STD_GATES[self.name].arity:
                raise QuantumError(f"{self.name} expects {_STD_GATES[self.name].arity} qubits")
        else:
            raise QuantumError(f"unknown gate {self.name!r}")


@dataclass(frozen=True)
class CircuitIR:
    n_qubits: int
    ops: tuple[CircuitOp, ...] = ()
    measured: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "measured", tuple(self.measured))
        for op in self.ops:
            for q in op.qubits:
                if not 0 <= q < self.n_qubits:
                    raise QuantumError(f"operand {q} out of range in {op.name}")
        if len(set(self.measured)) != len(self.measured):
            raise QuantumError("measured qubits must be distinct")
        for q in self.measured:
            if not 0 <= q < self.n_qubits:
                raise QuantumError(f"measured qubit {q} out of range")


@dataclass(frozen=True)
class QasmDoc:
    text: str


# measurement bits, in selector decoding order: each Bell outcome k splits into
# a sign bit (k in {1,3}) on the rotated control and a parity bit (k in {2,3})
# on the rotated target.
_BIT_QUBITS = {
    "s1": QUBIT_LABELS.index("m1"), "t1": QUBIT_LABELS.index("m3"),
    "s2": QUBIT_LABELS.index("m2"), "t2": QUBIT_LABELS.index("m4"),
    "s3": QUBIT_LABELS.index("A0"), "t3": QUBIT_LABELS.index("A1"),
    "l": QUBIT_LABELS.index("B2"), "m": QUBIT_LABELS.index("C"),
}
_BIT_ORDER = ("s1", "t1", "s2", "t2", "s3", "t3", "l", "m")


def _selector_bits(sel) -> tuple[int, ...]:
    def split(k):
        return int(k in (1, 3)), int(k in (2, 3))
    s1, t1 = split(sel.mentor_i)
    s2, t2 = split(sel.mentor_j)
    s3, t3 = split(sel.alice_k)
    return (s1, t1, s2, t2, s3, t3, sel.bob_l, sel.controller_m)


def _anf(truth: dict[tuple[int, ...], int]) -> list[int]:
    """Algebraic normal form coefficients, indexed by monomial bitmask."""
    nbits = len(_BIT_ORDER)
    coeff = [0] * (1 << nbits)
    for bits, v in truth.items():
        mask = sum(b << i for i, b in enumerate(bits))
        coeff[mask] = v
    for i in range(nbits):
        step = 1 << i
        for mask in range(1 << nbits):
            if mask & step:
                coeff[mask] ^= coeff[mask ^ step]
    return coeff


def _synthesize(target: int, truth: dict, pauli: str) -> list[CircuitOp]:
    """Controlled-Pauli network realizing X or Z to the power of a Boolean
    function of the measurement bits. Handles polynomial degree up to two
    (plain, singly, and doubly controlled gates)."""
    ops: list[CircuitOp] = []
    coeff = _anf(truth)
    monomials = sorted((bin(m).count("1"), m) for m in range(len(coeff)) if coeff[m])
    for degree, mask in monomials:
        controls = tuple(_BIT_QUBITS[_BIT_ORDER[i]] for i in range(len(_BIT_ORDER))
                         if mask >> i & 1)
        if degree == 0:
            ops.append(CircuitOp(pauli, (target,)))
        elif degree == 1:
            ops.append(CircuitOp("c" + pauli, (controls[0], target)))
        elif degree == 2 and pauli == "x":
            ops.append(CircuitOp("ccx", (*controls, target)))
        elif degree == 2 and pauli == "z":
            # doubly controlled Z via basis change on the target
            ops.append(CircuitOp("h", (target,)))
            ops.append(CircuitOp("ccx", (*controls, target)))
            ops.append(CircuitOp("h", (target,)))
        else:
            raise QuantumError(
                f"correction network needs degree-{degree} terms; not synthesizable")
    return ops


def _correction_network(target: int, pick) -> list[CircuitOp]:
    """Z network then X network, so the X power acts after the Z power."""
    x_truth, z_truth = {}, {}
    for sel in all_selectors():
        xe, ze, _ = pick(sel).xz_exponents()
        bits = _selector_bits(sel)
        for table, val in ((x_truth, xe), (z_truth, ze)):
            if table.setdefault(bits, val) != val:
                raise QuantumError("correction exponents are not functions of the bits")
    return _synthesize(target, z_truth, "z") + _synthesize(target, x_truth, "x")


def build_protocol_circuit(inputs: ProtocolInputs) -> CircuitIR:
    """The full ten-qubit coherent circuit for arbitrary payloads."""
    ops: list[CircuitOp] = []
    q = {label: i for i, label in enumerate(QUBIT_LABELS)}

    # payload preparation and the two entangled resource channels
    ops.append(CircuitOp("u", (q["A0"],), bases.state_prep_gate(inputs.x, inputs.y).matrix))
    ops += [CircuitOp("h", (q["m1"],)), CircuitOp("h", (q["m2"],)),
            CircuitOp("cx", (q["m1"], q["A1"])), CircuitOp("cx", (q["m2"], q["A2"])),
            CircuitOp("cz", (q["m1"], q["m2"]))]
    ops += [CircuitOp("h", (q["m3"],)), CircuitOp("h", (q["m4"],)),
            CircuitOp("cx", (q["m3"], q["B1"])), CircuitOp("cx", (q["m3"], q["C"])),
            CircuitOp("cx", (q["m4"], q["B2"])), CircuitOp("cx", (q["m4"], q["C"])),
            CircuitOp("cz", (q["m3"], q["m4"]))]

    # rotate every measurement onto the Z basis
    ops += [CircuitOp("cx", (q["m1"], q["m3"])), CircuitOp("h", (q["m1"],))]
    ops += [CircuitOp("cx", (q["m2"], q["m4"])), CircuitOp("h", (q["m2"],))]
    ops += [CircuitOp("cx", (q["A0"], q["A1"])), CircuitOp("h", (q["A0"],))]
    ops.append(CircuitOp("u", (q["B2"],), bases.xi_basis_gate(inputs.xi_basis()).matrix))
    ops.append(CircuitOp("h", (q["C"],)))

    # deferred outcome-conditioned corrections, synthesized from the tables
    ops += _correction_network(q["A2"], alice_correction)
    ops += _correction_network(q["B1"], bob_correction)

    return CircuitIR(len(QUBIT_LABELS), tuple(ops), (q["A2"], q["B1"]))


def simulate(c: CircuitIR) -> StateVector:
    """Exact statevector of the circuit (terminal measurements not collapsed)."""
    state = basis_state("0" * c.n_qubits)
    for op in c.ops:
        gate = UnitaryGate(1, op.matrix) if op.name == "u" else _STD_GATES[op.name]
        state = apply_unitary(state, gate, op.qubits)
    return state


def simulate_marginals(c: CircuitIR) -> dict[int, dict[int, float]]:
    """Exact Born distribution of each measured qubit."""
    state = simulate(c)
    probs = np.abs(state.amps.reshape([2] * c.n_qubits)) ** 2
    out = {}
    for qubit in c.measured:
        axes = tuple(i for i in range(c.n_qubits) if i != qubit)
        marg = probs.sum(axis=axes)
        out[qubit] = {0: float(marg[0]), 1: float(marg[1])}
    return out


def output_density(c: CircuitIR):
    """Reduced state of the two protocol outputs before terminal measurement."""
    return reduced_density(simulate(c), [OUT_RSP, OUT_TP])


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    ct, st = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[ct, -np.exp(1j * lam) * st],
                     [np.exp(1j * phi) * st, np.exp(1j * (phi + lam)) * ct]])


def zyz_angles(m: np.ndarray) -> tuple[float, float, float]:
    """Euler angles with u3(theta, phi, lam) == m up to global phase."""
    a, b = complex(m[0, 0]), complex(m[1, 0])
    theta = 2.0 * math.atan2(abs(b), abs(a))
    if abs(a) < 1e-12:
        delta = np.angle(b)
        phi = 0.0
        lam = float(np.angle(-m[0, 1]) - delta)
    else:
        delta = np.angle(a)
        phi = float(np.angle(b) - delta) if abs(b) > 1e-12 else 0.0
        lam = (float(np.angle(-m[0, 1]) - delta) if abs(m[0, 1]) > 1e-12
               else float(np.angle(m[1, 1]) - delta) - phi)
    phi = math.atan2(math.sin(phi), math.cos(phi)) + 0.0
    lam = math.atan2(math.sin(lam), math.cos(lam)) + 0.0
    rebuilt = u3_matrix(theta, phi, lam)
    phase = np.exp(1j * delta)
    if np.abs(phase * rebuilt - m).max() > 1e-10:
        raise QuantumError("Euler decomposition failed for the given matrix")
    return theta, phi, lam


def _fmt_angle(v: float) -> str:
    return format(v + 0.0, ".17g")


def export_qasm(c: CircuitIR) -> QasmDoc:
    """Deterministic OpenQASM 3 text; identical circuits export byte-identically."""
    lines = ["OPENQASM 3.0;", 'include "stdgates.inc";',
             f"qubit[{c.n_qubits}] q;", f"bit[{max(len(c.measured), 1)}] c;"]
    for op in c.ops:
        if op.name == "u":
            theta, phi, lam = zyz_angles(op.matrix)
            args = ", ".join(_fmt_angle(v) for v in (theta, phi, lam))
            lines.append(f"u({args}) q[{op.qubits[0]}];")
        else:
            operands = ", ".join(f"q[{i}]" for i in op.qubits)
            lines.append(f"{op.name} {operands};")
    for slot, qubit in enumerate(c.measured):
        lines.append(f"c[{slot}] = measure q[{qubit}];")
    return QasmDoc("\n".join(lines) + "\n")


_RE_QREG = re.compile(r"^qubit\[(\d+)\]\s+\w+$")
_RE_CREG = re.compile(r"^bit\[(\d+)\]\s+\w+$")
_RE_GATE = re.compile(r"^(h|x|z|cx|cz|ccx)\s+(.+)$")
_RE_U = re.compile(r"^u\(([^)]*)\)\s+q\[(\d+)\]$")
_RE_MEASURE = re.compile(r"^c\[(\d+)\]\s*=\s*measure\s+q\[(\d+)\]$")
_RE_OPERAND = re.compile(r"^q\[(\d+)\]$")


def parse_qasm(text: str) -> CircuitIR:
    """Parse the exported OpenQASM 3 subset back into a circuit."""
    n_qubits = None
    ops: list[CircuitOp] = []
    measured: list[tuple[int, int]] = []
    for raw in text.splitlines():
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        if not line.endswith(";"):
            raise QuantumError(f"missing ';' in line {raw!r}")
        stmt = line[:-1].strip()
        if stmt.startswith("OPENQASM") or stmt.startswith("include"):
            continue
        if (m := _RE_QREG.match(stmt)):
            n_qubits = int(m.group(1))
            continue
        if _RE_CREG.match(stmt):
            continue
        if (m := _RE_U.match(stmt)):
            angles = [float(v) for v in m.group(1).split(",")]
            if len(angles) != 3:
                raise QuantumError(f"u gate takes three angles: {raw!r}")
            ops.append(CircuitOp("u", (int(m.group(2)),), u3_matrix(*angles)))
            continue
        if (m := _RE_GATE.match(stmt)):
            qubits = []
            for token in m.group(2).split(","):
                om = _RE_OPERAND.match(token.strip())
                if not om:
                    raise QuantumError(f"bad operand in line {raw!r}")
                qubits.append(int(om.group(1)))
            ops.append(CircuitOp(m.group(1), tuple(qubits)))
            continue
        if (m := _RE_MEASURE.match(stmt)):
            measured.append((int(m.group(1)), int(m.group(2))))
            continue
        raise QuantumError(f"unsupported statement {raw!r}")
    if n_qubits is None:
        raise QuantumError("document declares no qubit register")
    measured.sort()
    return CircuitIR(n_qubits, tuple(ops), tuple(q for _, q in measured))


def qasm_filename(inputs: ProtocolInputs) -> str:
    """Stable file name derived from the protocol inputs."""
    canon = ",".join(repr(v) for v in
                     (inputs.x.real, inputs.x.imag, inputs.y.real, inputs.y.imag,
                      inputs.a, inputs.b))
    digest = hashlib.sha256(canon.encode()).hexdigest()[:12]
    return f"protocol_{digest}.qasm"
