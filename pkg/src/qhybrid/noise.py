"""Noise analysis: Kraus channels on the distributed qubits, per-branch output
states, numeric average fidelity, and the four closed-form fidelity
polynomials with cross-validation against the numeric oracle.
"""
from __future__ import annotations

import enum
import io
import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bases, channels
from .protocol import BranchSelector, ProtocolInputs, alice_correction, all_selectors, bob_correction
from .qcore import DensityMatrix, KrausChannel, QuantumError, ZERO_PROB, apply_kraus, to_density

# positions of the noise-exposed qubits within the combined channel order
NOISY_QUBITS = tuple(channels.TAU_ORDER.position(q) for q in ("A1", "A2", "B1", "B2", "C"))


class NoiseKind(enum.Enum):
    BIT_FLIP = "bitflip"
    PHASE_FLIP = "phaseflip"
    PHASE_DAMPING = "phasedamping"
    DEPOLARIZING = "depolarizing"

    @classmethod
    def parse(cls, name: str) -> "NoiseKind":
        for kind in cls:
            if kind.value == name.lower():
                return kind
        raise QuantumError(f"unknown noise kind {name!r}")


@dataclass(frozen=True)
class NoiseStrength:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise QuantumError(f"noise strength must be in [0, 1], got {self.value}")


@dataclass(frozen=True)
class FidelityRecord:
    kind: NoiseKind
    strength: float
    b2: float
    y2: float
    numeric_f: float
    closed_form_f: float
    deviation: float
    weighted_f: float


@dataclass(frozen=True)
class SweepGrid:
    kind: NoiseKind
    strengths: tuple[float, ...]
    b2_values: tuple[float, ...]
    y2_values: tuple[float, ...]

    def __post_init__(self):
        for name in ("strengths", "b2_values", "y2_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise QuantumError(f"{name} must be non-empty")
            if any(not 0.0 <= v <= 1.0 for v in vals):
                raise QuantumError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, vals)


def kraus_set(kind: NoiseKind, p: float) -> KrausChannel:
    """Kraus operators of the single-qubit channel at strength p."""
    NoiseStrength(p)
    if kind is NoiseKind.BIT_FLIP:
        ops = (np.sqrt(1 - p) * bases.PAULI_I, np.sqrt(p) * bases.PAULI_X)
    elif kind is NoiseKind.PHASE_FLIP:
        ops = (np.sqrt(1 - p) * bases.PAULI_I, np.sqrt(p) * bases.PAULI_Z)
    elif kind is NoiseKind.PHASE_DAMPING:
        ops = (np.sqrt(1 - p) * bases.PAULI_I,
               np.sqrt(p) * np.array([[1, 0], [0, 0]], dtype=complex),
               np.sqrt(p) * np.array([[0, 0], [0, 1]], dtype=complex))
    elif kind is NoiseKind.DEPOLARIZING:
        ops = (np.sqrt(1 - p) * bases.PAULI_I,
               np.sqrt(p / 3) * bases.PAULI_X,
               np.sqrt(p / 3) * bases.PAULI_Y,
               np.sqrt(p / 3) * bases.PAULI_Z)
    else:  # pragma: no cover
        raise QuantumError(f"unhandled noise kind {kind}")
    return KrausChannel(ops)


def noisy_channel(kind: NoiseKind, p: float) -> DensityMatrix:
    """The combined channel state after noise on each distributed qubit.

    Channels on distinct qubits commute, so one sequential single-qubit
    application per affected qubit equals the global product-operator sum.
    """
    rho = to_density(channels.combined_tau())
    ch = kraus_set(kind, p)
    for q in NOISY_QUBITS:
        rho = apply_kraus(rho, ch, q)
    return rho


def _alice_fold(k: int, inputs: ProtocolInputs) -> np.ndarray:
    """Fold the teleported payload into the Bell outcome bra on qubit A1."""
    b = bases.bell_state(k).amps.reshape(2, 2)
    psi0 = np.array([inputs.x, inputs.y], dtype=complex)
    return b.conj().T @ psi0


_EINSUM_PATH: list = [None]


def _branch_raw(noisy: DensityMatrix, inputs: ProtocolInputs,
                sel: BranchSelector) -> np.ndarray:
    """Unnormalized post-measurement operator on (A2, B1); trace = probability."""
    if noisy.n_qubits != 9:
        raise QuantumError("noisy channel state must cover the nine-qubit resource")
    t = noisy.elems.reshape([2] * 18)
    bi = bases.bell_state(sel.mentor_i).amps.reshape(2, 2)
    bj = bases.bell_state(sel.mentor_j).amps.reshape(2, 2)
    w = _alice_fold(sel.alice_k, inputs)
    xi = bases.xi_states(inputs.xi_basis())[sel.bob_l].amps
    xc = bases.x_states()[sel.controller_m].amps
    # ket axes 0..8 in TAU_ORDER, bra axes 9..17; keep A2, B1 on both sides
    args = (t, list(range(18)),
            bi.conj(), [0, 1], bj.conj(), [2, 3], w, [4], xi.conj(), [7], xc.conj(), [8],
            bi, [9, 10], bj, [11, 12], w.conj(), [13], xi, [16], xc, [17],
            [5, 6, 14, 15])
    if _EINSUM_PATH[0] is None:
        # operand shapes never change, so the contraction path is reusable
        _EINSUM_PATH[0] = np.einsum_path(*args, optimize="greedy")[0]
    out = np.einsum(*args, optimize=_EINSUM_PATH[0])
    return out.reshape(4, 4)


def branch_output(noisy: DensityMatrix, inputs: ProtocolInputs,
                  sel: BranchSelector) -> tuple[float, DensityMatrix]:
    """Renormalized corrected output on (A2, B1) plus the branch probability."""
    raw = _branch_raw(noisy, inputs, sel)
    p = float(np.trace(raw).real)
    if p < ZERO_PROB:
        raise QuantumError(f"branch {sel.key} has probability {p:.3e}")
    u = np.kron(alice_correction(sel).matrix, bob_correction(sel).matrix)
    return p, DensityMatrix(2, u @ (raw / p) @ u.conj().T)


def branch_fidelity(out: DensityMatrix, inputs: ProtocolInputs) -> float:
    """Overlap of the branch output with the desired joint state.

    The first output qubit carries the remotely prepared state and the
    second the teleported one."""
    target = np.kron([inputs.a, inputs.b], [inputs.x, inputs.y])
    return float((target.conj() @ out.elems @ target).real)


def _branch_scan(noisy: DensityMatrix, inputs: ProtocolInputs):
    """Per-branch (probability, fidelity) over all 256 selectors.

    Branches below the zero-probability threshold are skipped."""
    scan = []
    for sel in all_selectors():
        raw = _branch_raw(noisy, inputs, sel)
        p = float(np.trace(raw).real)
        if p < ZERO_PROB:
            continue
        u = np.kron(alice_correction(sel).matrix, bob_correction(sel).matrix)
        out = DensityMatrix(2, u @ (raw / p) @ u.conj().T)
        scan.append((sel, p, branch_fidelity(out, inputs)))
    return scan


def average_fidelity(kind: NoiseKind, p: float, inputs: ProtocolInputs,
                     noisy: DensityMatrix | None = None) -> float:
    """Plain mean of the branch fidelities over all realizable branches."""
    if noisy is None:
        noisy = noisy_channel(kind, p)
    scan = _branch_scan(noisy, inputs)
    return float(np.mean([f for _, _, f in scan]))


def weighted_average_fidelity(kind: NoiseKind, p: float, inputs: ProtocolInputs,
                              noisy: DensityMatrix | None = None) -> float:
    """Probability-weighted mean of the branch fidelities."""
    if noisy is None:
        noisy = noisy_channel(kind, p)
    scan = _branch_scan(noisy, inputs)
    return float(sum(pr * f for _, pr, f in scan))


def closed_form(kind: NoiseKind, p: float, b2: float, y2: float) -> float:
    """Literal evaluation of the published fidelity polynomial."""
    for name, v in (("strength", p), ("b2", b2), ("y2", y2)):
        if not 0.0 <= v <= 1.0:
            raise QuantumError(f"{name} must be in [0, 1], got {v}")
    if kind is NoiseKind.BIT_FLIP:
        return ((1 - 2 * p * (1 - p) * (1 - 2 * b2) ** 2)
                * (1 - 2 * p * (1 - p) * (1 - 2 * y2) ** 2))
    if kind is NoiseKind.PHASE_FLIP:
        return (1 - 4 * p * y2 * (3 - 6 * p + 4 * p ** 2) * (1 - y2)
                + 4 * (b2 ** 2 - b2)
                * (3 * p - 6 * p ** 2 + 4 * p ** 3
                   + 4 * (p - 4 * p ** 3 + 4 * p ** 4) * (y2 ** 2 - y2)))
    if kind is NoiseKind.PHASE_DAMPING:
        return 1 + 2 * p * ((3 + (-3 + p) * p) * y2 * (-1 + y2)
                            + (b2 ** 2 - b2)
                            * (3 - 3 * p + p ** 2
                               + 2 * (y2 ** 2 - y2) * (2 + (-2 + p) * p ** 2)))
    if kind is NoiseKind.DEPOLARIZING:
        return 1 - (8 / 243) * p * (
            3 * (3 - 2 * p) * (9 - 6 * p + 4 * p ** 2)
            + (y2 - y2 ** 2) * (3 - 4 * p) ** 2 * (9 - 4 * p * (3 - 2 * p))
            + (b2 - b2 ** 2) * (3 - 4 * p) ** 2
            * (9 - 12 * p + 8 * p ** 2 - 4 * (3 - 4 * p) ** 2 * (y2 - y2 ** 2)))
    raise QuantumError(f"unhandled noise kind {kind}")  # pragma: no cover


def payload_for(b2: float, y2: float, y_phase: float = 0.0) -> ProtocolInputs:
    """Inputs with the given squared magnitudes and optional phase on y."""
    y = np.sqrt(y2) * np.exp(1j * y_phase)
    return ProtocolInputs(np.sqrt(1 - y2), y, float(np.sqrt(1 - b2)), float(np.sqrt(b2)))


def _sweep_one_strength(args) -> list[FidelityRecord]:
    kind, strength, b2_values, y2_values, y_phase = args
    noisy = noisy_channel(kind, strength)
    records = []
    for b2 in b2_values:
        for y2 in y2_values:
            inputs = payload_for(b2, y2, y_phase)
            scan = _branch_scan(noisy, inputs)
            numeric = float(np.mean([f for _, _, f in scan]))
            weighted = float(sum(p * f for _, p, f in scan))
            cf = closed_form(kind, strength, b2, y2)
            records.append(FidelityRecord(kind, strength, b2, y2, numeric, cf,
                                          abs(numeric - cf), weighted))
    return records


def sweep(grid: SweepGrid, y_phase: float = 0.0, jobs: int = 1) -> list[FidelityRecord]:
    """One record per grid point, ordered by (strength, b2, y2).

    Grid points are evaluated independently; jobs > 1 parallelizes over
    strength values while keeping the output order fixed."""
    strengths = sorted(grid.strengths)
    b2s, y2s = sorted(grid.b2_values), sorted(grid.y2_values)
    work = [(grid.kind, s, b2s, y2s, y_phase) for s in strengths]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_sweep_one_strength, work))
    else:
        chunks = [_sweep_one_strength(w) for w in work]
    return [rec for chunk in chunks for rec in chunk]


def sweep_summary(records) -> dict[str, float]:
    """Maximum |numeric - closed form| per noise kind."""
    out: dict[str, float] = {}
    for rec in records:
        key = rec.kind.value
        out[key] = max(out.get(key, 0.0), rec.deviation)
    return out


CSV_HEADER = ("kind", "strength", "b2", "y2", "numeric_f", "closed_form_f", "deviation")


def _fmt(v: float) -> str:
    return format(v, ".12g")


def write_csv(records, stream, include_weighted: bool = False) -> None:
    """UTF-8 CSV with newline-terminated rows and 12 significant digits."""
    header = CSV_HEADER + (("weighted_f",) if include_weighted else ())
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for r in records:
        row = [r.kind.value, _fmt(r.strength), _fmt(r.b2), _fmt(r.y2),
               _fmt(r.numeric_f), _fmt(r.closed_form_f), _fmt(r.deviation)]
        if include_weighted:
            row.append(_fmt(r.weighted_f))
        writer.writerow(row)


def read_csv(stream) -> list[FidelityRecord]:
    reader = csv.reader(stream)
    header = next(reader)
    if tuple(header[:7]) != CSV_HEADER:
        raise QuantumError(f"unexpected CSV header {header}")
    has_weighted = len(header) > 7 and header[7] == "weighted_f"
    records = []
    for row in reader:
        kind = NoiseKind.parse(row[0])
        vals = [float(v) for v in row[1:]]
        weighted = vals[6] if has_weighted else float("nan")
        records.append(FidelityRecord(kind, vals[0], vals[1], vals[2],
                                      vals[3], vals[4], vals[5], weighted))
    return records


def records_to_string(records, include_weighted: bool = False) -> str:
    buf = io.StringIO()
    write_csv(records, buf, include_weighted)
    return buf.getvalue()
