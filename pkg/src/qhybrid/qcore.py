"""Dense complex linear algebra for multi-qubit pure and mixed states.

Qubit convention: position 0 is the leftmost ket factor and the most
significant bit of the amplitude index (big-endian packing).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ATOL = 1e-12
ZERO_PROB = 1e-14


class QuantumError(ValueError):
    pass


class ZeroProbabilityError(QuantumError):
    """Raised when a projection outcome has vanishing probability."""


def _as_complex(a, shape=None) -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if shape is not None and arr.shape != shape:
        raise QuantumError(f"expected array of shape {shape}, got {arr.shape}")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateVector:
    """Pure state of n qubits as 2^n complex amplitudes."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amps", _as_complex(self.amps, (2 ** self.n_qubits,)))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n < ZERO_PROB:
            raise ZeroProbabilityError("cannot normalize a zero vector")
        return StateVector(self.n_qubits, self.amps / n)

    def nonzero(self, tol: float = ATOL) -> list[tuple[str, complex]]:
        """(bitstring, amplitude) pairs with |amplitude| above tol."""
        out = []
        for idx in np.flatnonzero(np.abs(self.amps) > tol):
            out.append((format(int(idx), f"0{self.n_qubits}b"), complex(self.amps[idx])))
        return out


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state of n qubits as a 2^n x 2^n complex matrix."""

    n_qubits: int
    elems: np.ndarray

    def __post_init__(self):
        d = 2 ** self.n_qubits
        object.__setattr__(self, "elems", _as_complex(self.elems, (d, d)))

    def trace(self) -> float:
        return float(np.trace(self.elems).real)


@dataclass(frozen=True)
class UnitaryGate:
    """Unitary on 1-3 qubits; U†U == I within 1e-12."""

    arity: int
    matrix: np.ndarray

    def __post_init__(self):
        if not 1 <= self.arity <= 3:
            raise QuantumError(f"gate arity must be 1..3, got {self.arity}")
        d = 2 ** self.arity
        m = _as_complex(self.matrix, (d, d))
        if np.abs(m.conj().T @ m - np.eye(d)).max() > ATOL:
            raise QuantumError("matrix is not unitary within 1e-12")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class KrausChannel:
    """Single-qubit CPTP map given by 2x2 Kraus operators."""

    ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(_as_complex(k, (2, 2)) for k in self.ops)
        object.__setattr__(self, "ops", ops)
        s = sum(k.conj().T @ k for k in ops)
        if np.abs(s - np.eye(2)).max() > ATOL:
            raise QuantumError("Kraus operators do not satisfy sum K†K = I")


@dataclass(frozen=True)
class QubitOrdering:
    """Maps logical qubit labels to tensor positions (position 0 leftmost)."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise QuantumError("qubit labels must be unique")

    def position(self, label: str) -> int:
        return self.labels.index(label)

    def permutation_to(self, other: "QubitOrdering") -> tuple[int, ...]:
        """Axis permutation carrying a tensor in this order into `other`'s order."""
        if set(self.labels) != set(other.labels):
            raise QuantumError("orderings cover different label sets")
        return tuple(self.position(lbl) for lbl in other.labels)


def statevector(amps) -> StateVector:
    arr = np.asarray(amps, dtype=complex).reshape(-1)
    n = int(arr.size).bit_length() - 1
    if 2 ** n != arr.size:
        raise QuantumError(f"amplitude count {arr.size} is not a power of two")
    return StateVector(n, arr)


def basis_state(bits: str) -> StateVector:
    """Computational basis state from a bitstring like '0101'."""
    n = len(bits)
    amps = np.zeros(2 ** n, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(n, amps)


def to_density(s: StateVector) -> DensityMatrix:
    return DensityMatrix(s.n_qubits, np.outer(s.amps, s.amps.conj()))


def reorder(s: StateVector, current: QubitOrdering, target: QubitOrdering) -> StateVector:
    perm = current.permutation_to(target)
    t = s.amps.reshape([2] * s.n_qubits).transpose(perm)
    return StateVector(s.n_qubits, t.reshape(-1))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(a.n_qubits + b.n_qubits, np.kron(a.amps, b.amps))


def _check_targets(targets, arity: int, n: int):
    if len(targets) != arity:
        raise QuantumError(f"gate expects {arity} targets, got {len(targets)}")
    if len(set(targets)) != len(targets):
        raise QuantumError(f"duplicate target qubits {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise QuantumError(f"target {t} out of range for {n} qubits")


def apply_unitary(s: StateVector, g: UnitaryGate, targets) -> StateVector:
    """Apply g on the target qubits, identity elsewhere."""
    targets = list(targets)
    _check_targets(targets, g.arity, s.n_qubits)
    k = len(targets)
    psi = s.amps.reshape([2] * s.n_qubits)
    psi = np.moveaxis(psi, targets, range(k))
    shape = psi.shape
    psi = g.matrix @ psi.reshape(2 ** k, -1)
    psi = np.moveaxis(psi.reshape(shape), range(k), targets)
    return StateVector(s.n_qubits, psi.reshape(-1))


def apply_kraus(r: DensityMatrix, ch: KrausChannel, target: int) -> DensityMatrix:
    """rho' = sum_i K_i rho K_i† with each K_i embedded on the target qubit."""
    n = r.n_qubits
    if not 0 <= target < n:
        raise QuantumError(f"target {target} out of range for {n} qubits")
    t = r.elems.reshape([2] * (2 * n))
    out = np.zeros_like(t)
    for k in ch.ops:
        # ket axis `target`, bra axis `n + target`
        tmp = np.moveaxis(t, target, -1) @ k.T
        tmp = np.moveaxis(tmp, -1, target)
        tmp = np.moveaxis(tmp, n + target, -1) @ k.conj().T
        out += np.moveaxis(tmp, -1, n + target)
    return DensityMatrix(n, out.reshape(r.elems.shape))


def _check_orthonormal(basis, tol: float = 1e-10):
    for i, u in enumerate(basis):
        for j, v in enumerate(basis):
            ip = np.vdot(u.amps, v.amps)
            if abs(ip - (1.0 if i == j else 0.0)) > tol:
                raise QuantumError("projection basis is not orthonormal")


def project(s, targets, basis, which: int, remove: bool = False):
    """Project the target qubits onto basis[which].

    Returns (probability, post-state). The post-state keeps the collapsed
    qubits in place unless remove=True, in which case they are dropped.
    Raises ZeroProbabilityError when the branch probability is below 1e-14.
    """
    targets = list(targets)
    basis = list(basis)
    k = len(targets)
    if any(b.n_qubits != k for b in basis):
        raise QuantumError("basis states must live on the projected subset")
    _check_orthonormal(basis)
    outcome = basis[which].amps
    if isinstance(s, StateVector):
        return _project_pure(s, targets, outcome, remove)
    if isinstance(s, DensityMatrix):
        return _project_mixed(s, targets, outcome, remove)
    raise TypeError(f"cannot project object of type {type(s).__name__}")


def _project_pure(s: StateVector, targets, outcome, remove):
    n = s.n_qubits
    _check_targets(targets, len(targets), n)
    k = len(targets)
    psi = s.amps.reshape([2] * n)
    psi = np.moveaxis(psi, targets, range(k))
    rest = outcome.conj() @ psi.reshape(2 ** k, -1)
    p = float(np.vdot(rest, rest).real)
    if p < ZERO_PROB:
        raise ZeroProbabilityError(f"projection on qubits {targets} has probability {p:.3e}")
    rest = rest / np.sqrt(p)
    if remove:
        return p, StateVector(n - k, rest)
    full = np.kron(outcome, rest).reshape([2] * n)
    full = np.moveaxis(full, range(k), targets)
    return p, StateVector(n, full.reshape(-1))


def _project_mixed(r: DensityMatrix, targets, outcome, remove):
    n = r.n_qubits
    _check_targets(targets, len(targets), n)
    k = len(targets)
    rho = r.elems.reshape([2] * (2 * n))
    rho = np.moveaxis(rho, list(targets) + [n + t for t in targets],
                      list(range(k)) + list(range(n, n + k)))
    rho = rho.reshape(2 ** k, 2 ** (n - k), 2 ** k, 2 ** (n - k))
    sub = np.einsum("i,iajb,j->ab", outcome.conj(), rho, outcome, optimize=True)
    p = float(np.trace(sub).real)
    if p < ZERO_PROB:
        raise ZeroProbabilityError(f"projection on qubits {targets} has probability {p:.3e}")
    sub = sub / p
    if remove:
        return p, DensityMatrix(n - k, sub)
    collapsed = np.outer(outcome, outcome.conj())
    full = np.kron(collapsed.reshape(2 ** k, 2 ** k, 1, 1),
                   sub.reshape(1, 1, 2 ** (n - k), 2 ** (n - k)))
    full = full.transpose(0, 2, 1, 3).reshape([2] * (2 * n))
    full = np.moveaxis(full, list(range(k)) + list(range(n, n + k)),
                       list(targets) + [n + t for t in targets])
    return p, DensityMatrix(n, full.reshape(2 ** n, 2 ** n))


def partial_trace(r: DensityMatrix, keep) -> DensityMatrix:
    """Trace out everything except the `keep` qubits (result in keep order)."""
    keep = list(keep)
    if not keep:
        raise QuantumError("keep list must be non-empty")
    if len(set(keep)) != len(keep):
        raise QuantumError(f"duplicate keep qubits {keep}")
    n = r.n_qubits
    drop = [q for q in range(n) if q not in keep]
    t = r.elems.reshape([2] * (2 * n))
    perm = keep + drop + [n + q for q in keep] + [n + q for q in drop]
    t = t.transpose(perm)
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    t = t.reshape(dk, dd, dk, dd)
    return DensityMatrix(len(keep), np.einsum("iaja->ij", t))


def reduced_density(s: StateVector, keep) -> DensityMatrix:
    """Reduced density matrix of a pure state on the kept qubits."""
    keep = list(keep)
    n = s.n_qubits
    drop = [q for q in range(n) if q not in keep]
    psi = s.amps.reshape([2] * n).transpose(keep + drop).reshape(2 ** len(keep), -1)
    return DensityMatrix(len(keep), psi @ psi.conj().T)


def fidelity(pure: StateVector, mixed) -> float:
    """Overlap <psi|rho|psi>; accepts a DensityMatrix or a second pure state."""
    if isinstance(mixed, StateVector):
        if mixed.n_qubits != pure.n_qubits:
            raise QuantumError("state dimensions do not match")
        return float(abs(np.vdot(pure.amps, mixed.amps)) ** 2)
    if mixed.n_qubits != pure.n_qubits:
        raise QuantumError("state dimensions do not match")
    return float((pure.amps.conj() @ mixed.elems @ pure.amps).real)


def states_equal_up_to_phase(a: StateVector, b: StateVector, tol: float = 1e-10) -> bool:
    return abs(fidelity(a, b) - 1.0) < tol
