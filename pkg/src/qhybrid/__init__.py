"""Controller-gated bidirectional quantum communication simulator:
teleportation one way, remote state preparation the other, over a shared
nine-qubit entangled resource, with Kraus noise analysis and OpenQASM export.
"""
from .qcore import (ATOL, DensityMatrix, KrausChannel, QuantumError, QubitOrdering,
                    StateVector, UnitaryGate, ZeroProbabilityError, apply_kraus,
                    apply_unitary, basis_state, fidelity, partial_trace, project,
                    reduced_density, statevector, tensor, to_density)
from .bases import (BELL_BASIS, CORRECTION_CLOSURE, PauliString, XiBasis, bell_state,
                    pauli_string, state_prep_gate, x_states, xi_basis_gate, xi_states)
from .channels import ChannelPair, channel_pair, combined_tau, m_state, prepare_xi1, prepare_xi2
from .protocol import (BranchResult, BranchSelector, CorrectionEntry, ProtocolInputs,
                       alice_correction, all_selectors, bob_correction, compress_payload,
                       enumerate_branches, expand_payload, run_branch, run_generalized,
                       sample_run, search_corrections, table_cross_check)
from .noise import (FidelityRecord, NoiseKind, NoiseStrength, SweepGrid, average_fidelity,
                    branch_fidelity, branch_output, closed_form, kraus_set, noisy_channel,
                    payload_for, sweep, sweep_summary, weighted_average_fidelity)
from .circuitgen import (CircuitIR, CircuitOp, QasmDoc, build_protocol_circuit, export_qasm,
                         output_density, parse_qasm, qasm_filename, simulate, simulate_marginals)

__version__ = "0.1.0"
