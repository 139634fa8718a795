"""Entangled resource channels: gate-sequence preparation, analytic forms,
the combined nine-qubit resource, and the sixteen post-initiator states."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bases
from .qcore import QubitOrdering, StateVector, apply_unitary, basis_state, reorder, tensor

XI1_ORDER = QubitOrdering(("m1", "m2", "A1", "A2"))
XI2_ORDER = QubitOrdering(("m3", "m4", "B1", "B2", "C"))
# the combined channel interleaves the initiator's qubits ahead of the rest
TAU_ORDER = QubitOrdering(("m1", "m3", "m2", "m4", "A1", "A2", "B1", "B2", "C"))
M_ORDER = QubitOrdering(("A1", "A2", "B1", "B2", "C"))

# analytic amplitudes (value 1 means +1/2, -1 means -1/2)
XI1_TERMS = {"0000": 1, "0101": 1, "1010": 1, "1111": -1}
XI2_TERMS = {"00000": 1, "01011": 1, "10101": 1, "11110": -1}

_M_TERMS = {
    (0, 0): {"00000": 1, "01011": 1, "10101": 1, "11110": 1},
    (0, 1): {"00000": 1, "01011": -1, "10101": 1, "11110": -1},
    (0, 2): {"00011": 1, "01000": 1, "10110": -1, "11101": -1},
    (0, 3): {"00011": 1, "01000": -1, "10110": -1, "11101": 1},
    (1, 0): {"00000": 1, "01011": 1, "10101": -1, "11110": -1},
    (1, 1): {"00000": 1, "01011": -1, "10101": -1, "11110": 1},
    (1, 2): {"00011": 1, "01000": 1, "10110": 1, "11101": 1},
    (1, 3): {"00011": 1, "01000": -1, "10110": 1, "11101": -1},
    (2, 0): {"00101": 1, "01110": -1, "10000": 1, "11011": -1},
    (2, 1): {"00101": 1, "01110": 1, "10000": 1, "11011": 1},
    (2, 2): {"00110": -1, "01101": 1, "10011": 1, "11000": -1},
    (2, 3): {"00110": -1, "01101": -1, "10011": 1, "11000": 1},
    (3, 0): {"00101": 1, "01110": -1, "10000": -1, "11011": 1},
    (3, 1): {"00101": 1, "01110": 1, "10000": -1, "11011": -1},
    (3, 2): {"00110": -1, "01101": 1, "10011": -1, "11000": 1},
    (3, 3): {"00110": -1, "01101": -1, "10011": -1, "11000": -1},
}


@dataclass(frozen=True)
class ChannelPair:
    xi1: StateVector
    xi2: StateVector


def _from_terms(terms: dict[str, int]) -> StateVector:
    n = len(next(iter(terms)))
    amps = np.zeros(2 ** n, dtype=complex)
    for bits, sign in terms.items():
        amps[int(bits, 2)] = 0.5 * sign
    return StateVector(n, amps)


def xi1_analytic() -> StateVector:
    return _from_terms(XI1_TERMS)


def xi2_analytic() -> StateVector:
    return _from_terms(XI2_TERMS)


def prepare_xi1() -> StateVector:
    """Four-qubit resource: H on q0,q1; CNOT (q0,q2),(q1,q3); CZ (q0,q1)."""
    s = basis_state("0000")
    s = apply_unitary(s, bases.H, [0])
    s = apply_unitary(s, bases.H, [1])
    s = apply_unitary(s, bases.CNOT, [0, 2])
    s = apply_unitary(s, bases.CNOT, [1, 3])
    return apply_unitary(s, bases.CZ, [0, 1])


def prepare_xi2() -> StateVector:
    """Five-qubit resource: H on q0,q1; CNOT (q0,q2),(q0,q4),(q1,q3),(q1,q4); CZ (q0,q1)."""
    s = basis_state("00000")
    s = apply_unitary(s, bases.H, [0])
    s = apply_unitary(s, bases.H, [1])
    s = apply_unitary(s, bases.CNOT, [0, 2])
    s = apply_unitary(s, bases.CNOT, [0, 4])
    s = apply_unitary(s, bases.CNOT, [1, 3])
    s = apply_unitary(s, bases.CNOT, [1, 4])
    return apply_unitary(s, bases.CZ, [0, 1])


def channel_pair() -> ChannelPair:
    return ChannelPair(prepare_xi1(), prepare_xi2())


def combined_tau() -> StateVector:
    """Nine-qubit combined channel, in the interleaved TAU_ORDER label order."""
    product = tensor(prepare_xi1(), prepare_xi2())
    natural = QubitOrdering(XI1_ORDER.labels + XI2_ORDER.labels)
    return reorder(product, natural, TAU_ORDER)


def m_state(i: int, j: int) -> StateVector:
    """Five-qubit entangled resource left after initiator outcomes (i, j)."""
    if (i, j) not in _M_TERMS:
        raise KeyError(f"indices must be in 0..3, got {(i, j)}")
    return _from_terms(_M_TERMS[(i, j)])
