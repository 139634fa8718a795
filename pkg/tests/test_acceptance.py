"""End-to-end acceptance suite: every release criterion at its stated
tolerance, one printed pass/fail line per criterion."""
import time

import numpy as np
import pytest

from qhybrid import (NoiseKind, ProtocolInputs, SweepGrid, average_fidelity, bell_state,
                     build_protocol_circuit, closed_form, combined_tau, enumerate_branches,
                     export_qasm, fidelity, m_state, output_density, parse_qasm, payload_for,
                     prepare_xi1, prepare_xi2, run_generalized, simulate_marginals,
                     statevector, sweep, sweep_summary, table_cross_check, tensor)
from qhybrid.channels import xi1_analytic, xi2_analytic
from qhybrid.noise import read_csv, write_csv
from qhybrid.protocol import BranchSelector

from conftest import random_inputs

GRID5 = (0.0, 0.25, 0.5, 0.75, 1.0)
PAYLOAD5 = (0.1, 0.3, 0.5, 0.7, 0.9)


def _report(num, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")
    assert ok, detail


def test_criterion_01_noiseless_determinism():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 1.0
    for _ in range(100):
        inputs = random_inputs(rng)
        for result in enumerate_branches(inputs):
            if result.probability == 0.0:
                continue
            worst = min(worst, result.fidelity_rsp, result.fidelity_tp)
    elapsed = time.perf_counter() - start
    ok = worst >= 1 - 1e-10 and elapsed < 60
    _report(1, ok, f"100 inputs x 256 branches, min fidelity 1-{1 - worst:.2e}, "
                   f"{elapsed:.1f}s (< 60s)")


def test_criterion_02_channel_preparation():
    start = time.perf_counter()
    dev1 = np.abs(prepare_xi1().amps - xi1_analytic().amps).max()
    dev2 = np.abs(prepare_xi2().amps - xi2_analytic().amps).max()
    tau = combined_tau()
    recon = np.zeros_like(tau.amps)
    for i in range(4):
        for j in range(4):
            term = tensor(tensor(bell_state(i), bell_state(j)), m_state(i, j))
            recon = recon + 0.25 * term.amps
    dev3 = np.abs(recon - tau.amps).max()
    elapsed = time.perf_counter() - start
    ok = max(dev1, dev2) < 1e-12 and dev3 < 1e-12 and elapsed < 1
    _report(2, ok, f"gate-prep dev {max(dev1, dev2):.2e}, identity dev {dev3:.2e}, "
                   f"{elapsed:.2f}s (< 1s)")


def test_criterion_03_correction_table_soundness():
    rng = np.random.default_rng(303)
    start = time.perf_counter()
    mismatches = table_cross_check(random_inputs(rng))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 10
    _report(3, ok, f"{256 - len(mismatches)}/256 stored pairs confirmed by closure "
                   f"search, {elapsed:.1f}s (< 10s)")


def test_criterion_04_bit_flip_closed_form():
    start = time.perf_counter()
    grid = SweepGrid(NoiseKind.BIT_FLIP, GRID5, PAYLOAD5, PAYLOAD5)
    records = sweep(grid)
    max_dev = max(r.deviation for r in records)
    boundary_dev = max(abs(r.numeric_f - 1.0) for r in records
                       if r.strength in (0.0, 1.0))
    balanced_dev = max(abs(r.numeric_f - 1.0) for r in records
                       if r.b2 == 0.5 and r.y2 == 0.5)
    elapsed = time.perf_counter() - start
    ok = max_dev < 1e-6 and boundary_dev < 1e-9 and balanced_dev < 1e-9 and elapsed < 300
    _report(4, ok, f"5x5x5 grid max |numeric-closed| {max_dev:.2e} (< 1e-6), "
                   f"boundary dev {boundary_dev:.2e}, balanced-line dev "
                   f"{balanced_dev:.2e}, {elapsed:.0f}s (< 300s)")


@pytest.mark.parametrize("kind", tuple(NoiseKind))
def test_criterion_05_zero_noise_unity(kind):
    value = average_fidelity(kind, 0.0, payload_for(0.37, 0.22, y_phase=0.5))
    ok = abs(value - 1.0) < 1e-9
    _report(5, ok, f"{kind.value} strength 0 average fidelity {value:.12f}")


@pytest.mark.parametrize("kind", [NoiseKind.PHASE_FLIP, NoiseKind.PHASE_DAMPING,
                                  NoiseKind.DEPOLARIZING])
def test_criterion_06_closed_form_cross_validation(kind):
    records = sweep(SweepGrid(kind, GRID5, PAYLOAD5, PAYLOAD5))
    summary = sweep_summary(records)
    max_dev = summary[kind.value]
    # the numeric oracle is authoritative; agreement is the observed outcome
    ok = max_dev < 1e-6
    _report(6, ok, f"{kind.value} 5x5x5 grid max |numeric-closed| {max_dev:.2e}")


def test_criterion_07_figure_shapes(tmp_path):
    lam_grid = tuple(float(v) for v in np.linspace(0, 1, 21))
    files = {
        "bitflip": sweep(SweepGrid(NoiseKind.BIT_FLIP, lam_grid, (0.4,), (0.3,))),
        "phaseflip": sweep(SweepGrid(NoiseKind.PHASE_FLIP, GRID5, (0.4,), (0.3,))),
        "phasedamping": sweep(SweepGrid(NoiseKind.PHASE_DAMPING, GRID5, (0.4,), (0.3,))),
        "balanced": sweep(SweepGrid(NoiseKind.BIT_FLIP, GRID5, (0.5,), (0.5,))),
    }
    parsed = {}
    for name, records in files.items():
        path = tmp_path / f"{name}.csv"
        with path.open("w", encoding="utf-8") as fh:
            write_csv(records, fh)
        with path.open(encoding="utf-8") as fh:
            parsed[name] = read_csv(fh)

    bf = parsed["bitflip"]
    sym_dev = max(abs(bf[i].numeric_f - bf[len(bf) - 1 - i].numeric_f)
                  for i in range(len(bf)))
    pf = [r.numeric_f for r in parsed["phaseflip"]]
    pd_ = [r.numeric_f for r in parsed["phasedamping"]]
    flat_dev = max(abs(r.numeric_f - 1.0) for r in parsed["balanced"])
    ok = (sym_dev < 1e-9 and pf[0] >= max(pf) and pd_[0] >= max(pd_)
          and flat_dev < 1e-9)
    _report(7, ok, f"symmetry dev {sym_dev:.2e} (< 1e-9), zero-strength maximal "
                   f"(pf, pd), balanced-line dev {flat_dev:.2e}")


def test_criterion_08_deferred_measurement_circuit():
    rng = np.random.default_rng(808)
    worst = 1.0
    for _ in range(20):
        inputs = random_inputs(rng)
        rho = output_density(build_protocol_circuit(inputs))
        worst = min(worst, fidelity(tensor(inputs.psi1(), inputs.psi0()), rho))
    example = ProtocolInputs(1 / np.sqrt(5), 2 / np.sqrt(5),
                             1 / np.sqrt(2), 1 / np.sqrt(2))
    marg = simulate_marginals(build_protocol_circuit(example))
    dev4 = abs(marg[4][1] - 0.5)
    dev7 = abs(marg[7][1] - 0.8)
    ok = worst >= 1 - 1e-10 and dev4 < 1e-9 and dev7 < 1e-9
    _report(8, ok, f"20 inputs min output fidelity 1-{1 - worst:.2e}, example "
                   f"marginals dev ({dev4:.2e}, {dev7:.2e})")


def test_criterion_09_generalization():
    rng = np.random.default_rng(909)
    start = time.perf_counter()
    worst = 1.0
    for n, m in ((1, 1), (2, 3), (3, 2), (4, 4)):
        for _ in range(10):
            t1, t2 = rng.uniform(0, np.pi / 2, size=2)
            payload = np.zeros(2 ** n, dtype=complex)
            payload[0] = np.cos(t1)
            payload[-1] = np.sin(t1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            target = np.zeros(2 ** m, dtype=complex)
            target[0], target[-1] = np.cos(t2), np.sin(t2)
            sel = BranchSelector(*rng.integers(0, 4, size=3), *rng.integers(0, 2, size=2))
            bob_state, alice_state = run_generalized(statevector(payload),
                                                     statevector(target), sel)
            worst = min(worst,
                        fidelity(statevector(payload), bob_state),
                        fidelity(statevector(target), alice_state))
    elapsed = time.perf_counter() - start
    ok = worst >= 1 - 1e-10 and elapsed < 30
    _report(9, ok, f"four (n, m) shapes x 10 selectors, min fidelity "
                   f"1-{1 - worst:.2e}, {elapsed:.1f}s (< 30s)")


def test_criterion_10_qasm_round_trip():
    rng = np.random.default_rng(1010)
    inputs = random_inputs(rng)
    circuit = build_protocol_circuit(inputs)
    doc = export_qasm(circuit)
    assert export_qasm(build_protocol_circuit(inputs)).text == doc.text
    back = parse_qasm(doc.text)
    m1 = simulate_marginals(circuit)
    m2 = simulate_marginals(back)
    dev = max(abs(m1[q][b] - m2[q][b]) for q in m1 for b in (0, 1))
    ok = dev < 1e-12
    _report(10, ok, f"export byte-deterministic, round-trip marginal dev {dev:.2e}")
