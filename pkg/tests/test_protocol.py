import numpy as np
import pytest

from qhybrid import (BranchSelector, ProtocolInputs, QuantumError, alice_correction,
                     all_selectors, bob_correction, compress_payload, enumerate_branches,
                     expand_payload, fidelity, run_branch, run_generalized, sample_run,
                     search_corrections, statevector, table_cross_check, tensor)
from qhybrid.protocol import pre_correction_factors
from qhybrid.qcore import partial_trace, reduced_density, to_density
from qhybrid import bases, channels

from conftest import random_inputs

GENERIC = ProtocolInputs(0.6, 0.8, np.sqrt(0.3), np.sqrt(0.7))


def _sel(i, j, k, l, m):
    return BranchSelector(i, j, k, l, m)


# ---------------------------------------------------------------- tables

def test_bob_correction_examples():
    assert bob_correction(_sel(0, 1, 0, 0, 0)).name == "I"
    assert bob_correction(_sel(0, 1, 3, 0, 1)).name == "zxz"
    assert bob_correction(_sel(2, 0, 2, 0, 0)).name == "I"


def test_alice_correction_examples():
    assert alice_correction(_sel(0, 0, 0, 0, 0)).name == "I"
    assert alice_correction(_sel(0, 1, 0, 1, 0)).name == "x"
    assert alice_correction(_sel(0, 3, 0, 1, 0)).name == "xzxz"


def test_bob_correction_independent_of_bob_outcome():
    for sel in all_selectors():
        flipped = BranchSelector(sel.mentor_i, sel.mentor_j, sel.alice_k,
                                 1 - sel.bob_l, sel.controller_m)
        assert bob_correction(sel).name == bob_correction(flipped).name


def test_alice_correction_independent_of_alice_outcome():
    for sel in all_selectors():
        for k in range(4):
            other = BranchSelector(sel.mentor_i, sel.mentor_j, k,
                                   sel.bob_l, sel.controller_m)
            assert alice_correction(sel).name == alice_correction(other).name


def test_selector_validation():
    with pytest.raises(QuantumError):
        BranchSelector(4, 0, 0, 0, 0)
    with pytest.raises(QuantumError):
        BranchSelector(0, 0, 0, 2, 0)


# ---------------------------------------------------------------- worked example

def test_worked_example_controller_plus():
    # outcomes (Phi0, Phi1), alice Phi0, bob xi1, controller +
    # pre-correction factors: (b|0>+a|1>) on A2 and the payload intact on B1
    sel = _sel(0, 1, 0, 1, 0)
    x, y, a, b = GENERIC.x, GENERIC.y, GENERIC.a, GENERIC.b
    prob, a2_raw, b1_raw = pre_correction_factors(GENERIC, sel)
    assert prob == pytest.approx(1 / 256, abs=1e-12)
    assert fidelity(statevector([b, a]), a2_raw) == pytest.approx(1.0, abs=1e-10)
    assert fidelity(statevector([x, y]), b1_raw) == pytest.approx(1.0, abs=1e-10)
    assert bob_correction(sel).name == "I"
    assert alice_correction(sel).name == "x"
    result = run_branch(GENERIC, sel)
    assert result.fidelity_tp == pytest.approx(1.0, abs=1e-10)
    assert result.fidelity_rsp == pytest.approx(1.0, abs=1e-10)


def test_worked_example_controller_minus():
    # same prefix with controller -: factors become (b|0>-a|1>) and (x|0>-y|1>);
    # the stored corrections are xz for alice and z for bob (the z entry is the
    # one the search confirms; prose elsewhere is inconsistent about it)
    sel = _sel(0, 1, 0, 1, 1)
    x, y, a, b = GENERIC.x, GENERIC.y, GENERIC.a, GENERIC.b
    _, a2_raw, b1_raw = pre_correction_factors(GENERIC, sel)
    assert fidelity(statevector([b, -a]), a2_raw) == pytest.approx(1.0, abs=1e-10)
    assert fidelity(statevector([x, -y]), b1_raw) == pytest.approx(1.0, abs=1e-10)
    assert alice_correction(sel).name == "xz"
    assert bob_correction(sel).name == "z"
    alice_hits, bob_hits = search_corrections(GENERIC, sel)
    assert "xz" in alice_hits
    assert "z" in bob_hits and "x" not in bob_hits
    result = run_branch(GENERIC, sel)
    assert result.fidelity_tp == pytest.approx(1.0, abs=1e-10)
    assert result.fidelity_rsp == pytest.approx(1.0, abs=1e-10)


# ---------------------------------------------------------------- determinism

def test_all_branches_deterministic_complex_payload(rng):
    inputs = random_inputs(rng)
    results = enumerate_branches(inputs)
    assert len(results) == 256
    total = sum(r.probability for r in results)
    assert total == pytest.approx(1.0, abs=1e-10)
    worst = min(min(r.fidelity_rsp, r.fidelity_tp) for r in results)
    assert worst >= 1 - 1e-10
    # branch probabilities are uniform for normalized payloads
    for r in results:
        assert r.probability == pytest.approx(1 / 256, abs=1e-12)


def test_enumerate_matches_run_branch(rng):
    inputs = random_inputs(rng)
    results = {r.selector.key: r for r in enumerate_branches(inputs)}
    for sel in (_sel(0, 0, 0, 0, 0), _sel(3, 1, 2, 1, 0), _sel(2, 3, 1, 0, 1)):
        single = run_branch(inputs, sel)
        listed = results[sel.key]
        assert listed.probability == pytest.approx(single.probability, abs=1e-12)
        assert listed.fidelity_tp == pytest.approx(single.fidelity_tp, abs=1e-12)
        assert listed.fidelity_rsp == pytest.approx(single.fidelity_rsp, abs=1e-12)


def test_mentor_marginal_probability(rng):
    inputs = random_inputs(rng)
    results = enumerate_branches(inputs)
    for i in range(4):
        for j in range(4):
            marg = sum(r.probability for r in results
                       if (r.selector.mentor_i, r.selector.mentor_j) == (i, j))
            assert marg == pytest.approx(1 / 16, abs=1e-10)


def test_degenerate_inputs_still_total():
    results = enumerate_branches(ProtocolInputs(1.0, 0.0, 0.0, 1.0))
    assert sum(r.probability for r in results) == pytest.approx(1.0, abs=1e-10)
    live = [r for r in results if r.probability > 0]
    assert all(min(r.fidelity_rsp, r.fidelity_tp) >= 1 - 1e-10 for r in live)


# ---------------------------------------------------------------- table soundness

def test_table_cross_check_no_mismatches(rng):
    assert table_cross_check(random_inputs(rng)) == []


def test_search_finds_unique_action_class(rng):
    # up to global phase exactly one closure action repairs a generic branch
    inputs = random_inputs(rng)
    for sel in (_sel(1, 2, 3, 0, 1), _sel(3, 3, 0, 1, 0)):
        alice_hits, bob_hits = search_corrections(inputs, sel)
        # hits pair up as {P, -P}; two names per winning action
        assert len(alice_hits) == 2
        assert len(bob_hits) == 2


# ---------------------------------------------------------------- sampling

def test_sample_run_deterministic():
    sel_a, res_a = sample_run(GENERIC, seed=7)
    sel_b, res_b = sample_run(GENERIC, seed=7)
    assert sel_a == sel_b
    assert res_a.probability == res_b.probability


def test_sample_run_noiseless_fidelities():
    for seed in range(5):
        _, result = sample_run(GENERIC, seed=seed)
        assert result.fidelity_tp >= 1 - 1e-10
        assert result.fidelity_rsp >= 1 - 1e-10


def test_sample_frequencies_match_enumeration():
    # chi-square of 1e5 draws against the enumerated uniform distribution;
    # threshold is mean + 3 sigma of the chi2(255) statistic
    results = enumerate_branches(GENERIC)
    probs = np.array([r.probability for r in results])
    rng = np.random.default_rng(123)
    n = 100_000
    counts = np.bincount(rng.choice(len(probs), size=n, p=probs / probs.sum()),
                         minlength=256)
    expected = probs * n
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < 255 + 3 * np.sqrt(2 * 255)


# ---------------------------------------------------------------- controller gating

def test_controller_gating_blocks_outputs(rng):
    # without the controller's projection no fixed correction recovers both
    # plus/minus post-states, and the unprojected marginal caps the fidelity
    inputs = random_inputs(rng)
    prefix = (1, 0, 2, 1)
    hits_plus = search_corrections(inputs, _sel(*prefix, 0))
    hits_minus = search_corrections(inputs, _sel(*prefix, 1))
    assert not (hits_plus[0] & hits_minus[0])
    assert not (hits_plus[1] & hits_minus[1])

    # marginal on A2 with C traced out instead of projected
    full = tensor(inputs.psi0(), channels.combined_tau())
    from qhybrid.qcore import project
    labels = list(("A0",) + channels.TAU_ORDER.labels)
    state = full
    for group, which in ((("m1", "m3"), prefix[0]), (("m2", "m4"), prefix[1]),
                         (("A0", "A1"), prefix[2])):
        targets = [labels.index(g) for g in group]
        _, state = project(state, targets, bases.BELL_BASIS, which, remove=True)
        for g in group:
            labels.remove(g)
    xi = bases.xi_states(inputs.xi_basis())
    _, state = project(state, [labels.index("B2")], xi, prefix[3], remove=True)
    labels.remove("B2")
    rho_a2 = reduced_density(state, [labels.index("A2")])
    cap = max(inputs.a ** 2, inputs.b ** 2)
    assert fidelity(statevector([inputs.a, inputs.b]), rho_a2) <= cap + 1e-10


# ---------------------------------------------------------------- generalization

def test_compress_ghz():
    s = statevector([1, 0, 0, 0, 0, 0, 0, 1]).normalized()
    out = compress_payload(s)
    expected = tensor(statevector([1, 1]).normalized(), statevector([1, 0, 0, 0]))
    assert np.abs(out.amps - expected.amps).max() < 1e-12


def test_compress_two_qubit():
    a, b = 0.6, 0.8
    out = compress_payload(statevector([a, 0, 0, b]))
    assert np.allclose(out.amps, [a, 0, b, 0])


def test_compress_rejects_non_ghz():
    with pytest.raises(QuantumError):
        compress_payload(statevector([0.6, 0.8, 0, 0]))


def test_expand_payload():
    out = expand_payload(statevector([0.6, 0.8]), 3)
    expected = np.zeros(8)
    expected[0], expected[7] = 0.6, 0.8
    assert np.allclose(out.amps, expected)
    assert np.allclose(expand_payload(statevector([0.6, 0.8]), 1).amps, [0.6, 0.8])
    with pytest.raises(QuantumError):
        expand_payload(statevector([0.6, 0.8]), 0)


def test_compress_expand_round_trip(rng):
    t = rng.uniform(0, np.pi / 2)
    amps = np.zeros(16, dtype=complex)
    amps[0], amps[15] = np.cos(t), np.sin(t) * np.exp(1j * 0.4)
    s = statevector(amps)
    compressed = compress_payload(s)
    single = statevector(compressed.amps[[0, 8]])
    assert np.abs(expand_payload(single, 4).amps - s.amps).max() < 1e-12


def test_run_generalized_round_trip(rng):
    for n, m in ((2, 3), (3, 2)):
        t1, t2 = rng.uniform(0, np.pi / 2, size=2)
        payload = np.zeros(2 ** n, dtype=complex)
        payload[0], payload[-1] = np.cos(t1), np.sin(t1) * np.exp(1j * 0.9)
        target = np.zeros(2 ** m, dtype=complex)
        target[0], target[-1] = np.cos(t2), np.sin(t2)
        sel = _sel(*rng.integers(0, 4, size=3), *rng.integers(0, 2, size=2))
        bob_state, alice_state = run_generalized(statevector(payload),
                                                 statevector(target), sel)
        assert fidelity(statevector(payload), bob_state) == pytest.approx(1.0, abs=1e-10)
        assert fidelity(statevector(target), alice_state) == pytest.approx(1.0, abs=1e-10)


def test_run_generalized_degenerate_matches_run_branch():
    sel = _sel(2, 1, 3, 0, 1)
    payload = statevector([GENERIC.x, GENERIC.y])
    target = statevector([GENERIC.a, GENERIC.b])
    bob_state, alice_state = run_generalized(payload, target, sel)
    single = run_branch(GENERIC, sel)
    assert fidelity(bob_state, single.b1_state) == pytest.approx(1.0, abs=1e-10)
    assert fidelity(alice_state, single.a2_state) == pytest.approx(1.0, abs=1e-10)


def test_run_generalized_rejects_complex_target():
    payload = statevector([0.6, 0.8])
    target = statevector([0.6, 0.8j])
    with pytest.raises(QuantumError):
        run_generalized(payload, target, _sel(0, 0, 0, 0, 0))
