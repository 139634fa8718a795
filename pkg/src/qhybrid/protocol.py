"""Five-party measurement protocol: branch execution, outcome-indexed Pauli
corrections, Born-rule sampling, and the many-qubit payload generalization.

A branch fixes all five measurement outcomes: two Bell outcomes for the
initiator, one Bell outcome for the teleporting party, a two-outcome basis
known only to the preparing party, and the gating X-basis outcome of the
controller (4*4*4*2*2 = 256 branches).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bases, channels
from .qcore import (ATOL, QuantumError, QubitOrdering, StateVector, ZeroProbabilityError,
                    apply_unitary, fidelity, project, statevector, tensor)

FULL_ORDER = QubitOrdering(("A0",) + channels.TAU_ORDER.labels)


@dataclass(frozen=True)
class ProtocolInputs:
    """Payload amplitudes: (x, y) is teleported, (a, b) is remotely prepared."""

    x: complex
    y: complex
    a: float
    b: float

    def __post_init__(self):
        if abs(abs(self.x) ** 2 + abs(self.y) ** 2 - 1.0) > ATOL:
            raise QuantumError("teleportation payload must satisfy |x|^2 + |y|^2 = 1")
        bases.XiBasis(self.a, self.b)  # validates range and normalization

    def psi0(self) -> StateVector:
        return statevector([self.x, self.y])

    def psi1(self) -> StateVector:
        return statevector([self.a, self.b])

    def xi_basis(self) -> bases.XiBasis:
        return bases.XiBasis(self.a, self.b)


@dataclass(frozen=True)
class BranchSelector:
    mentor_i: int
    mentor_j: int
    alice_k: int
    bob_l: int
    controller_m: int

    def __post_init__(self):
        for v in (self.mentor_i, self.mentor_j, self.alice_k):
            if v not in (0, 1, 2, 3):
                raise QuantumError(f"Bell outcome must be 0..3, got {v}")
        for v in (self.bob_l, self.controller_m):
            if v not in (0, 1):
                raise QuantumError(f"binary outcome must be 0 or 1, got {v}")

    @property
    def key(self) -> tuple[int, int, int, int, int]:
        return (self.mentor_i, self.mentor_j, self.alice_k, self.bob_l, self.controller_m)


def all_selectors() -> list[BranchSelector]:
    """All 256 selectors in lexicographic (i, j, k, l, m) order."""
    return [BranchSelector(i, j, k, l, m)
            for i in range(4) for j in range(4) for k in range(4)
            for l in range(2) for m in range(2)]


@dataclass(frozen=True)
class CorrectionEntry:
    selector: BranchSelector
    bob_op: bases.PauliString
    alice_op: bases.PauliString


@dataclass(frozen=True)
class BranchResult:
    selector: BranchSelector
    probability: float
    a2_state: StateVector | None
    b1_state: StateVector | None
    fidelity_rsp: float
    fidelity_tp: float


def _p(name: str) -> bases.PauliString:
    return bases.pauli_string(name)


# Receiver-side corrections, grouped by the initiator outcome pair. Within a
# group the operator depends only on the Bell outcome k and the controller
# outcome m (0 for +, 1 for -).
_BOB_GROUPS = (
    ({(0, 0), (0, 1), (1, 2), (1, 3)},
     {(0, 0): "I", (0, 1): "z", (1, 0): "z", (1, 1): "I",
      (2, 0): "x", (2, 1): "xz", (3, 0): "zx", (3, 1): "zxz"}),
    ({(1, 0), (1, 1), (0, 2), (0, 3)},
     {(0, 0): "z", (0, 1): "I", (1, 0): "I", (1, 1): "z",
      (2, 0): "xz", (2, 1): "x", (3, 0): "zxz", (3, 1): "zx"}),
    ({(2, 0), (2, 1), (3, 2), (3, 3)},
     {(0, 0): "x", (0, 1): "xz", (1, 0): "zx", (1, 1): "zxz",
      (2, 0): "I", (2, 1): "z", (3, 0): "z", (3, 1): "I"}),
    ({(3, 0), (3, 1), (2, 2), (2, 3)},
     {(0, 0): "xz", (0, 1): "x", (1, 0): "zxz", (1, 1): "zx",
      (2, 0): "z", (2, 1): "I", (3, 0): "I", (3, 1): "z"}),
)

# Preparer-side corrections; within a group the operator depends only on the
# two-outcome basis result l and the controller outcome m.
_ALICE_GROUPS = (
    ({(0, 0), (1, 0), (2, 1), (3, 1)},
     {(0, 0): "I", (0, 1): "z", (1, 0): "xz", (1, 1): "x"}),
    ({(0, 1), (1, 1), (2, 0), (3, 0)},
     {(0, 0): "z", (0, 1): "I", (1, 0): "x", (1, 1): "xz"}),
    ({(0, 2), (1, 2), (2, 3), (3, 3)},
     {(0, 0): "x", (0, 1): "zx", (1, 0): "xzx", (1, 1): "I"}),
    ({(0, 3), (1, 3), (2, 2), (3, 2)},
     {(0, 0): "xz", (0, 1): "zxz", (1, 0): "xzxz", (1, 1): "z"}),
)


def _materialize_bob() -> dict[tuple[int, int, int, int], bases.PauliString]:
    table = {}
    for pairs, rows in _BOB_GROUPS:
        for (i, j) in pairs:
            for (k, m), name in rows.items():
                table[(i, j, k, m)] = _p(name)
    return table


def _materialize_alice() -> dict[tuple[int, int, int, int], bases.PauliString]:
    table = {}
    for pairs, rows in _ALICE_GROUPS:
        for (i, j) in pairs:
            for (l, m), name in rows.items():
                table[(i, j, l, m)] = _p(name)
    return table


BOB_TABLE = _materialize_bob()
ALICE_TABLE = _materialize_alice()


def bob_correction(sel: BranchSelector) -> bases.PauliString:
    """Correction on the receiver qubit; independent of the preparer outcome."""
    return BOB_TABLE[(sel.mentor_i, sel.mentor_j, sel.alice_k, sel.controller_m)]


def alice_correction(sel: BranchSelector) -> bases.PauliString:
    """Correction on the preparation target; independent of the Bell outcome k."""
    return ALICE_TABLE[(sel.mentor_i, sel.mentor_j, sel.bob_l, sel.controller_m)]


def correction_entry(sel: BranchSelector) -> CorrectionEntry:
    return CorrectionEntry(sel, bob_correction(sel), alice_correction(sel))


def _measurement_plan(inputs: ProtocolInputs):
    """Measured label groups, bases, and the selector component for each."""
    xi0, xi1 = bases.xi_states(inputs.xi_basis())
    xp, xm = bases.x_states()
    return (
        (("m1", "m3"), bases.BELL_BASIS, "mentor_i"),
        (("m2", "m4"), bases.BELL_BASIS, "mentor_j"),
        (("A0", "A1"), bases.BELL_BASIS, "alice_k"),
        (("B2",), (xi0, xi1), "bob_l"),
        (("C",), (xp, xm), "controller_m"),
    )


def _factor_product(state: StateVector) -> tuple[StateVector, StateVector]:
    """Split a product two-qubit state into its single-qubit factors."""
    m = state.amps.reshape(2, 2)
    u, s, vh = np.linalg.svd(m)
    if s[1] > 1e-10:
        raise QuantumError("two-qubit state is not a product state")
    return StateVector(1, u[:, 0]), StateVector(1, vh[0, :])


def _finish_branch(state: StateVector, prob: float, inputs: ProtocolInputs,
                   sel: BranchSelector) -> BranchResult:
    """Apply corrections to the remaining (A2, B1) pair and score the outputs."""
    a2_raw, b1_raw = _factor_product(state)
    a2 = StateVector(1, alice_correction(sel).matrix @ a2_raw.amps)
    b1 = StateVector(1, bob_correction(sel).matrix @ b1_raw.amps)
    return BranchResult(sel, prob, a2, b1,
                        fidelity_rsp=fidelity(inputs.psi1(), a2),
                        fidelity_tp=fidelity(inputs.psi0(), b1))


def _project_branch(inputs: ProtocolInputs, sel: BranchSelector) -> tuple[float, StateVector]:
    """Project the full ten-qubit state down to the (A2, B1) pair for one branch."""
    state = tensor(inputs.psi0(), channels.combined_tau())
    labels = list(FULL_ORDER.labels)
    prob = 1.0
    for group, basis, attr in _measurement_plan(inputs):
        targets = [labels.index(g) for g in group]
        try:
            p, state = project(state, targets, basis, getattr(sel, attr), remove=True)
        except ZeroProbabilityError as exc:
            raise ZeroProbabilityError(
                f"branch {sel.key}: projection of {group} vanished") from exc
        prob *= p
        for g in group:
            labels.remove(g)
    assert labels == ["A2", "B1"]
    return prob, state


def pre_correction_factors(inputs: ProtocolInputs,
                           sel: BranchSelector) -> tuple[float, StateVector, StateVector]:
    """Branch probability and the raw single-qubit factors before corrections."""
    prob, state = _project_branch(inputs, sel)
    a2_raw, b1_raw = _factor_product(state)
    return prob, a2_raw, b1_raw


def run_branch(inputs: ProtocolInputs, sel: BranchSelector) -> BranchResult:
    """Execute one outcome branch end to end on the full ten-qubit state."""
    prob, state = _project_branch(inputs, sel)
    return _finish_branch(state, prob, inputs, sel)


def search_corrections(inputs: ProtocolInputs,
                       sel: BranchSelector) -> tuple[set[str], set[str]]:
    """Names of all closure operators that repair this branch, found by
    exhaustive search over the eight-element closure (independent of the
    stored tables)."""
    _, a2_raw, b1_raw = pre_correction_factors(inputs, sel)
    alice_hits = {p.name for p in bases.CORRECTION_CLOSURE
                  if fidelity(inputs.psi1(), StateVector(1, p.matrix @ a2_raw.amps)) > 1 - 1e-10}
    bob_hits = {p.name for p in bases.CORRECTION_CLOSURE
                if fidelity(inputs.psi0(), StateVector(1, p.matrix @ b1_raw.amps)) > 1 - 1e-10}
    return alice_hits, bob_hits


def table_cross_check(inputs: ProtocolInputs) -> list[BranchSelector]:
    """Selectors whose stored correction pair is not confirmed by brute force."""
    bad = []
    for sel in all_selectors():
        try:
            alice_hits, bob_hits = search_corrections(inputs, sel)
        except ZeroProbabilityError:
            continue
        if (alice_correction(sel).name not in alice_hits
                or bob_correction(sel).name not in bob_hits):
            bad.append(sel)
    return bad


def _zero_branch(sel: BranchSelector) -> BranchResult:
    return BranchResult(sel, 0.0, None, None, math.nan, math.nan)


def enumerate_branches(inputs: ProtocolInputs) -> list[BranchResult]:
    """All 256 branch results, sharing projection prefixes across branches.

    Zero-probability branches are carried with probability 0 and NaN
    fidelities instead of raising.
    """
    root = tensor(inputs.psi0(), channels.combined_tau())
    plan = _measurement_plan(inputs)
    results: list[BranchResult] = []

    def descend(state, labels, prob, depth, picked):
        if depth == len(plan):
            sel = BranchSelector(*picked)
            results.append(_finish_branch(state, prob, inputs, sel))
            return
        group, basis, _ = plan[depth]
        targets = [labels.index(g) for g in group]
        rest = [g for g in labels if g not in group]
        for which in range(len(basis)):
            try:
                p, nxt = project(state, targets, basis, which, remove=True)
            except ZeroProbabilityError:
                for tail in _selector_tails(depth + 1):
                    results.append(_zero_branch(BranchSelector(*picked, which, *tail)))
                continue
            descend(nxt, rest, prob * p, depth + 1, picked + [which])

    def _selector_tails(depth):
        sizes = [4, 4, 4, 2, 2][depth:]
        tails = [()]
        for size in sizes:
            tails = [t + (v,) for t in tails for v in range(size)]
        return tails

    descend(root, list(FULL_ORDER.labels), 1.0, 0, [])
    results.sort(key=lambda r: r.selector.key)
    return results


def sample_run(inputs: ProtocolInputs, seed: int) -> tuple[BranchSelector, BranchResult]:
    """Draw one branch with Born-rule probability; deterministic per seed."""
    results = enumerate_branches(inputs)
    probs = np.array([r.probability for r in results])
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    picked = results[int(rng.choice(len(results), p=probs))]
    return picked.selector, picked


def _ghz_amplitudes(s: StateVector) -> tuple[complex, complex]:
    """Amplitudes (on |0...0> and |1...1>) of a GHZ-class state."""
    lo, hi = s.amps[0], s.amps[-1]
    weight_elsewhere = np.abs(s.amps[1:-1]).max(initial=0.0)
    if weight_elsewhere > ATOL:
        raise QuantumError("state is not GHZ-class (amplitude weight off the ends)")
    return complex(lo), complex(hi)


def compress_payload(s: StateVector) -> StateVector:
    """Fold a GHZ-class state onto its first qubit via a CNOT fan-out."""
    _ghz_amplitudes(s)
    out = s
    for t in range(1, s.n_qubits):
        out = apply_unitary(out, bases.CNOT, [0, t])
    return out


def expand_payload(q: StateVector, count: int) -> StateVector:
    """Fan a single qubit out onto `count` qubits: x|0>+y|1> -> x|0..0>+y|1..1>."""
    if q.n_qubits != 1:
        raise QuantumError("expand_payload takes a single-qubit state")
    if count < 1:
        raise QuantumError(f"count must be >= 1, got {count}")
    out = q
    for t in range(1, count):
        out = tensor(out, statevector([1, 0]))
        out = apply_unitary(out, bases.CNOT, [0, t])
    return out


def run_generalized(payload: StateVector, target: StateVector,
                    sel: BranchSelector) -> tuple[StateVector, StateVector]:
    """Teleport an n-qubit GHZ-class payload while remotely preparing an
    m-qubit GHZ-class target, through one single-qubit protocol branch.

    The target amplitudes must be real and non-negative (the preparation
    basis is real)."""
    x, y = _ghz_amplitudes(payload)
    a, b = _ghz_amplitudes(target)
    if abs(a.imag) > ATOL or abs(b.imag) > ATOL:
        raise QuantumError("target amplitudes must be real")
    inputs = ProtocolInputs(x, y, a.real, b.real)
    compress_payload(payload)  # validates GHZ form; the single-qubit core is (x, y)
    result = run_branch(inputs, sel)
    bob_state = expand_payload(result.b1_state, payload.n_qubits)
    alice_state = expand_payload(result.a2_state, target.n_qubits)
    return bob_state, alice_state
