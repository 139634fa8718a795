"""Measurement bases and the named gate library used by the protocol."""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .qcore import ATOL, QuantumError, StateVector, UnitaryGate

_SQ2 = 1.0 / np.sqrt(2.0)

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

H = UnitaryGate(1, np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2)
X = UnitaryGate(1, PAULI_X)
Z = UnitaryGate(1, PAULI_Z)
CNOT = UnitaryGate(2, np.array([[1, 0, 0, 0],
                                [0, 1, 0, 0],
                                [0, 0, 0, 1],
                                [0, 0, 1, 0]], dtype=complex))
CZ = UnitaryGate(2, np.diag([1, 1, 1, -1]).astype(complex))
TOFFOLI = UnitaryGate(3, np.eye(8, dtype=complex)[:, [0, 1, 2, 3, 4, 5, 7, 6]])
# balanced superposition gate; also the X-basis change (equal to H)
BT = UnitaryGate(1, np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2)


@dataclass(frozen=True)
class XiBasis:
    """Real measurement basis {a|0>+b|1>, b|0>-a|1>} known only to the sender."""

    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.a <= 1.0 and 0.0 <= self.b <= 1.0):
            raise QuantumError("basis amplitudes must lie in [0, 1]")
        if abs(self.a ** 2 + self.b ** 2 - 1.0) > ATOL:
            raise QuantumError("basis amplitudes must satisfy a^2 + b^2 = 1")


@dataclass(frozen=True)
class PauliString:
    """Ordered product of I/X/Z factors, applied right-to-left as written.

    The name 'zx' means: apply X first, then Z; its matrix is Z @ X. A phase
    slot records the global phase relative to the canonical X^a Z^b form.
    """

    factors: tuple[str, ...]

    def __post_init__(self):
        for f in self.factors:
            if f not in ("I", "x", "z"):
                raise QuantumError(f"unknown Pauli factor {f!r}")

    @property
    def name(self) -> str:
        return "".join(self.factors) if self.factors else "I"

    @property
    def matrix(self) -> np.ndarray:
        mats = {"I": PAULI_I, "x": PAULI_X, "z": PAULI_Z}
        return reduce(np.matmul, (mats[f] for f in self.factors), PAULI_I.copy())

    def xz_exponents(self) -> tuple[int, int, complex]:
        """(x_exp, z_exp, phase) with matrix == phase * X^x_exp @ Z^z_exp."""
        m = self.matrix
        for xe in (0, 1):
            for ze in (0, 1):
                canon = np.linalg.matrix_power(PAULI_X, xe) @ np.linalg.matrix_power(PAULI_Z, ze)
                for phase in (1.0, -1.0):
                    if np.abs(m - phase * canon).max() < ATOL:
                        return xe, ze, phase
        raise QuantumError(f"{self.name} is not proportional to X^a Z^b")

    def as_gate(self) -> UnitaryGate:
        return UnitaryGate(1, self.matrix)


def pauli_string(name: str) -> PauliString:
    """Parse names like 'I', 'x', 'zxz' into a PauliString."""
    if name == "I":
        return PauliString(())
    return PauliString(tuple(name))


# all corrections the protocol ever needs, as written in the outcome tables
CORRECTION_CLOSURE = tuple(pauli_string(n) for n in
                           ("I", "x", "z", "xz", "zx", "zxz", "xzx", "xzxz"))


def bell_state(i: int) -> StateVector:
    """The four maximally entangled two-qubit states, indexed 0-3."""
    if i not in (0, 1, 2, 3):
        raise QuantumError(f"Bell index must be 0..3, got {i}")
    amps = np.zeros(4, dtype=complex)
    if i == 0:
        amps[0b00], amps[0b11] = _SQ2, _SQ2
    elif i == 1:
        amps[0b00], amps[0b11] = _SQ2, -_SQ2
    elif i == 2:
        amps[0b01], amps[0b10] = _SQ2, _SQ2
    else:
        amps[0b01], amps[0b10] = _SQ2, -_SQ2
    return StateVector(2, amps)


BELL_BASIS = tuple(bell_state(i) for i in range(4))


def xi_states(basis: XiBasis) -> tuple[StateVector, StateVector]:
    a, b = basis.a, basis.b
    return (StateVector(1, np.array([a, b], dtype=complex)),
            StateVector(1, np.array([b, -a], dtype=complex)))


def x_states() -> tuple[StateVector, StateVector]:
    return (StateVector(1, np.array([_SQ2, _SQ2], dtype=complex)),
            StateVector(1, np.array([_SQ2, -_SQ2], dtype=complex)))


def state_prep_gate(x: complex, y: complex) -> UnitaryGate:
    """Unitary sending |0> to x|0> + y|1> (first column (x, y))."""
    if abs(abs(x) ** 2 + abs(y) ** 2 - 1.0) > ATOL:
        raise QuantumError("state amplitudes must satisfy |x|^2 + |y|^2 = 1")
    return UnitaryGate(1, np.array([[x, -np.conj(y)], [y, np.conj(x)]], dtype=complex))


def xi_basis_gate(basis: XiBasis) -> UnitaryGate:
    """Basis change sending the xi states to |0>, |1>; self-inverse and real."""
    a, b = basis.a, basis.b
    return UnitaryGate(1, np.array([[a, b], [b, -a]], dtype=complex))
