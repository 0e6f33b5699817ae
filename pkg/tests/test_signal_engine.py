import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as orc
from analog_qc import quantum_math as qm
from analog_qc import signal_engine as se
from analog_qc.errors import (
    DegenerateStateError,
    DomainError,
    UnsupportedConfigurationError,
    ValidationError,
)
from analog_qc.signal_engine import Gate, NoiseModel, SignalConfig

CFG1, CFG2, CFG3 = SignalConfig(1), SignalConfig(2), SignalConfig(3)


def amps_from_seed(seed, d):
    r = np.random.default_rng(seed)
    v = r.standard_normal(d) + 1j * r.standard_normal(d)
    return v / np.linalg.norm(v)


# -- configuration ---------------------------------------------------------------


def test_default_sampling_grid():
    assert CFG1.samples_per_period == 64
    assert CFG2.samples_per_period == 128
    assert CFG3.samples_per_period == 256


def test_carrier_frequencies_double_per_qubit():
    assert CFG3.angular_frequency(0) == pytest.approx(2 * np.pi * 1000)
    assert CFG3.angular_frequency(2) == pytest.approx(4 * CFG3.angular_frequency(0))


@pytest.mark.parametrize("spp", [2, 3, 48, 100])
def test_samples_per_period_must_be_large_power_of_two(spp):
    with pytest.raises(DomainError):
        SignalConfig(2, samples_per_period=spp)


def test_qubit_cap():
    with pytest.raises(UnsupportedConfigurationError):
        SignalConfig(4)


@pytest.mark.parametrize("bad", [-1.0, float("nan"), float("inf")])
def test_noise_model_rejects_invalid(bad):
    with pytest.raises(ValidationError):
        NoiseModel(awgn_sigma=bad)


def test_noise_model_round_trip():
    nm = NoiseModel(0.1, 0.2, 0.3, 0.4)
    assert NoiseModel.from_dict(nm.to_dict()) == nm
    with pytest.raises(ValidationError):
        NoiseModel.from_dict({"bogus": 1.0})


# -- basis signals ---------------------------------------------------------------


def test_basis_zero_single_qubit():
    t = CFG1.times()
    sig = se.basis_signal(0, CFG1)
    np.testing.assert_allclose(sig.samples, np.exp(1j * 2 * np.pi * 1000 * t), atol=1e-12)
    np.testing.assert_allclose(np.abs(sig.samples), 1.0, atol=1e-12)


def test_basis_one_is_conjugate_of_zero():
    np.testing.assert_allclose(
        se.basis_signal(1, CFG1).samples, se.basis_signal(0, CFG1).samples.conj(), atol=1e-12
    )


def test_basis_two_of_two_qubits():
    t = CFG2.times()
    w0 = 2 * np.pi * 1000
    expected = np.exp(-1j * 2 * w0 * t) * np.exp(1j * w0 * t)
    np.testing.assert_allclose(se.basis_signal(2, CFG2).samples, expected, atol=1e-12)


@pytest.mark.parametrize("cfg", [CFG1, CFG2, CFG3])
def test_basis_orthonormal(cfg):
    D = cfg.dimension
    gram = np.array(
        [[se.inner_product(se.basis_signal(x, cfg), se.basis_signal(y, cfg)) for y in range(D)] for x in range(D)]
    )
    np.testing.assert_allclose(gram, np.eye(D), atol=1e-12)


@pytest.mark.parametrize("x", [-1, 2])
def test_basis_index_out_of_range(x):
    with pytest.raises(DomainError):
        se.basis_signal(x, CFG1)


# -- synthesis and decomposition --------------------------------------------------


def test_synthesize_single_term():
    np.testing.assert_allclose(se.synthesize([1, 0], CFG1).samples, se.basis_signal(0, CFG1).samples, atol=1e-12)


def test_synthesize_plus_is_cosine():
    s = 1 / np.sqrt(2)
    t = CFG1.times()
    np.testing.assert_allclose(
        se.synthesize([s, s], CFG1).samples, np.sqrt(2) * np.cos(2 * np.pi * 1000 * t), atol=1e-12
    )


def test_synthesize_singlet_overlaps():
    s = 1 / np.sqrt(2)
    sig = se.synthesize([0, s, -s, 0], CFG2)
    assert se.inner_product(se.basis_signal(1, CFG2), sig) == pytest.approx(s, abs=1e-12)
    assert se.inner_product(se.basis_signal(2, CFG2), sig) == pytest.approx(-s, abs=1e-12)


def test_synthesize_rejects_unnormalized():
    with pytest.raises(ValidationError):
        se.synthesize([1, 1], CFG1)
    sig = se.synthesize([1, 1], CFG1, normalized=False)
    assert se.rms(sig) == pytest.approx(np.sqrt(2))


def test_decompose_basis_signal():
    np.testing.assert_allclose(se.decompose(se.basis_signal(3, CFG2)), [0, 0, 0, 1], atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3))
def test_decompose_synthesize_round_trip(seed, n):
    cfg = SignalConfig(n)
    a = amps_from_seed(seed, cfg.dimension)
    sig = se.synthesize(a, cfg)
    np.testing.assert_allclose(se.decompose(sig), a, atol=1e-9)
    # <phi_0|psi> = a_0 by linearity and orthonormality
    assert se.inner_product(se.basis_signal(0, cfg), sig) == pytest.approx(a[0], abs=1e-12)


def test_inner_product_config_mismatch():
    with pytest.raises(DomainError):
        se.inner_product(se.basis_signal(0, CFG1), se.basis_signal(0, CFG2))


def test_noisy_decomposition_norm_deviation(rng):
    # projection of white noise onto 2 carriers: each amplitude error has
    # per-quadrature std sigma/sqrt(S), so |a|^2 - 1 has std ~ 2 sigma/sqrt(S)
    sigma = 0.2
    sig = se.basis_signal(0, CFG1)
    dev = []
    for _ in range(2000):
        a = se.decompose(se.add_noise(sig, NoiseModel(awgn_sigma=sigma), rng))
        dev.append(np.linalg.norm(a) ** 2 - 1)
    dev = np.array(dev)
    assert np.all(dev != 0)
    assert np.std(dev) == pytest.approx(2 * sigma / np.sqrt(64), rel=0.1)
    off = []
    for _ in range(2000):
        off.append(se.decompose(se.add_noise(sig, NoiseModel(awgn_sigma=sigma), rng))[1])
    assert np.sqrt(np.mean(np.abs(off) ** 2)) == pytest.approx(sigma * np.sqrt(2 / 64), rel=0.1)


# -- partial projections -------------------------------------------------------------


def test_partial_project_zero_state():
    psi0, psi1 = se.partial_project(se.basis_signal(0, CFG1), 0)
    np.testing.assert_allclose(psi0.samples, 1.0, atol=1e-12)
    np.testing.assert_allclose(psi1.samples, 0.0, atol=1e-12)


def test_partial_project_singlet():
    s = 1 / np.sqrt(2)
    psi0, psi1 = se.partial_project(se.synthesize([0, s, -s, 0], CFG2), 0)
    np.testing.assert_allclose(se.decompose(psi0), [0, -s], atol=1e-12)
    np.testing.assert_allclose(se.decompose(psi1), [s, 0], atol=1e-12)
    assert psi0.qubits == (1,)


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3), data=st.data())
def test_partial_project_parseval_and_reassembly(seed, n, data):
    cfg = SignalConfig(n)
    q = data.draw(st.integers(0, n - 1))
    sig = se.synthesize(amps_from_seed(seed, cfg.dimension), cfg)
    psi0, psi1 = se.partial_project(sig, q)
    assert se.rms(psi0) ** 2 + se.rms(psi1) ** 2 == pytest.approx(se.rms(sig) ** 2, abs=1e-9)
    np.testing.assert_allclose(se.reassemble(psi0, psi1, q).samples, sig.samples, atol=1e-9)


def test_partial_project_bad_qubit():
    with pytest.raises(DomainError):
        se.partial_project(se.basis_signal(0, CFG1), 1)


# -- gates -------------------------------------------------------------------------------


@given(seed=st.integers(0, 2**32 - 1))
def test_identity_gate_is_samplewise_identity(seed):
    sig = se.synthesize(amps_from_seed(seed, 4), CFG2)
    out = se.apply_1q_gate(sig, qm.I2, 1)
    np.testing.assert_allclose(out.samples, sig.samples, atol=1e-12)


def test_hadamard_on_zero():
    out = se.apply_1q_gate(se.basis_signal(0, CFG1), qm.H, 0)
    np.testing.assert_allclose(se.decompose(out), [1 / np.sqrt(2)] * 2, atol=1e-12)


def test_x_on_qubit0_of_00():
    out = se.apply_1q_gate(se.basis_signal(0, CFG2), qm.X, 0)
    np.testing.assert_allclose(se.decompose(out), [0, 1, 0, 0], atol=1e-12)


@pytest.mark.parametrize("x, expected", [(0, 0), (1, 3), (2, 2), (3, 1)])
def test_cnot_truth_table(x, expected):
    out = se.apply_controlled_gate(se.basis_signal(x, CFG2), qm.X)
    target = np.zeros(4)
    target[expected] = 1
    np.testing.assert_allclose(se.decompose(out), target, atol=1e-12)


def test_bell_state():
    sig = se.apply_1q_gate(se.basis_signal(0, CFG2), qm.H, 0)
    sig = se.apply_controlled_gate(sig, qm.X)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(se.decompose(sig), [s, 0, 0, s], atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1), data=st.data())
def test_gates_match_matrix_oracle(seed, data):
    r = np.random.default_rng(seed)
    n = data.draw(st.integers(1, 3))
    cfg = SignalConfig(n)
    a = amps_from_seed(seed, cfg.dimension)
    U = orc.haar(r)
    q = data.draw(st.integers(0, n - 1))
    out = se.apply_1q_gate(se.synthesize(a, cfg), U, q)
    np.testing.assert_allclose(se.decompose(out), orc.embed_1q(U, q, n) @ a, atol=1e-9)
    assert se.rms(out) == pytest.approx(1.0, abs=1e-9)
    if n == 2:
        out = se.apply_controlled_gate(se.synthesize(a, cfg), U)
        np.testing.assert_allclose(se.decompose(out), orc.controlled(U) @ a, atol=1e-9)


def test_non_unitary_gate_rejected():
    with pytest.raises(ValidationError):
        se.apply_1q_gate(se.basis_signal(0, CFG1), np.array([[1, 1], [0, 1]]), 0)


def test_controlled_gate_needs_two_qubits():
    with pytest.raises(UnsupportedConfigurationError):
        se.apply_controlled_gate(se.basis_signal(0, CFG1), qm.X)
    with pytest.raises(UnsupportedConfigurationError):
        se.apply_controlled_gate(se.basis_signal(0, CFG3), qm.X)


def test_zero_noise_model_is_bit_exact(rng):
    sig = se.synthesize(amps_from_seed(1, 4), CFG2)
    a = se.apply_1q_gate(sig, qm.H, 1, NoiseModel(), rng)
    b = se.apply_1q_gate(sig, qm.H, 1)
    assert np.array_equal(a.samples, b.samples)


def test_gate_noise_is_seeded():
    sig = se.basis_signal(0, CFG1)
    nm = NoiseModel(0.1, 0.05, 0.05, 0.0)
    a = se.apply_1q_gate(sig, qm.H, 0, nm, np.random.default_rng(3))
    b = se.apply_1q_gate(sig, qm.H, 0, nm, np.random.default_rng(3))
    c = se.apply_1q_gate(sig, qm.H, 0, nm, np.random.default_rng(4))
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_stochastic_op_needs_rng():
    with pytest.raises(DomainError):
        se.apply_1q_gate(se.basis_signal(0, CFG1), qm.H, 0, NoiseModel(awgn_sigma=0.1))


# -- RMS and measurement ---------------------------------------------------------------


def test_rms_values():
    assert se.rms(se.basis_signal(1, CFG2)) == pytest.approx(1.0, abs=1e-12)
    assert se.rms(se.StateSignal(np.zeros(64), CFG1)) == 0.0
    s = 1 / np.sqrt(2)
    psi0, _ = se.partial_project(se.synthesize([s, s], CFG1), 0)
    assert se.rms(psi0) == pytest.approx(s, abs=1e-12)


def test_rms_meter_error_is_relative(rng):
    sig = se.basis_signal(0, CFG1)
    vals = [se.rms(sig, NoiseModel(rms_meter_error_sigma=0.05), rng) for _ in range(4000)]
    assert np.mean(vals) == pytest.approx(1.0, abs=0.005)
    assert np.std(vals) == pytest.approx(0.05, rel=0.1)


def test_measure_zero_state(rng):
    for _ in range(50):
        out, col = se.measure_qubit(se.basis_signal(0, CFG1), 0, rng=rng)
        assert out == 0
        np.testing.assert_allclose(col.samples, se.basis_signal(0, CFG1).samples, atol=1e-12)


def test_measure_plus_is_fair():
    r = np.random.default_rng(99)
    s = 1 / np.sqrt(2)
    plus = se.synthesize([s, s], CFG1)
    n = 20000
    zeros = sum(se.measure_qubit(plus, 0, rng=r)[0] == 0 for _ in range(n))
    # 0.5 +- 0.006 at 1e5 trials corresponds to ~ 1.9 sigma; scale the band to N
    assert abs(zeros / n - 0.5) <= 4 * np.sqrt(0.25 / n)


def test_born_probability_exact():
    sig = se.synthesize([np.sqrt(0.3), np.sqrt(0.7)], CFG1)
    assert se.outcome_probability(sig, 0) == pytest.approx(0.3, abs=1e-12)


def test_collapse_and_sequential_measurement(rng):
    s = 1 / np.sqrt(2)
    bell = se.synthesize([s, 0, 0, s], CFG2)
    for _ in range(40):
        b0, col = se.measure_qubit(bell, 0, rng=rng)
        assert se.rms(col) == pytest.approx(1.0, abs=1e-12)
        b1, col2 = se.measure_qubit(col, 1, rng=rng)
        assert b0 == b1
        expect = np.zeros(4)
        expect[3 * b0] = 1
        np.testing.assert_allclose(np.abs(se.decompose(col2)), expect, atol=1e-12)


def test_measure_zero_signal_raises(rng):
    with pytest.raises(DegenerateStateError):
        se.measure_qubit(se.StateSignal(np.zeros(64), CFG1), 0, rng=rng)
    with pytest.raises(DegenerateStateError):
        se.outcome_probability(se.StateSignal(np.zeros(64), CFG1), 0)


def test_tie_goes_to_zero(monkeypatch):
    class FixedU:
        def random(self):
            return 0.5  # u = 1 - 0.5 = 0.5 = p

    s = 1 / np.sqrt(2)
    out, _ = se.measure_qubit(se.synthesize([s, s], CFG1), 0, rng=FixedU())
    assert out == 0


# -- additive noise --------------------------------------------------------------------


def test_add_noise_zero_sigma_is_identity(rng):
    sig = se.basis_signal(0, CFG1)
    assert np.array_equal(se.add_noise(sig, NoiseModel(), rng).samples, sig.samples)


def test_add_noise_second_moment():
    r = np.random.default_rng(5)
    sigma = 0.3
    sig = se.basis_signal(0, CFG1)
    d = [se.rms(se.StateSignal(se.add_noise(sig, NoiseModel(awgn_sigma=sigma), r).samples - sig.samples, CFG1)) ** 2
         for _ in range(10000)]
    assert np.mean(d) == pytest.approx(2 * sigma**2, rel=0.05)


# -- batched runner ----------------------------------------------------------------------


def _random_gates(r, n, depth):
    gates, ops = [], []
    for _ in range(depth):
        U = orc.haar(r)
        if n == 2 and r.random() < 0.3:
            gates.append(Gate(U, 1, controlled=True))
            ops.append((U, 1, True))
        else:
            q = int(r.integers(n))
            gates.append(Gate(U, q))
            ops.append((U, q, False))
    return gates, ops


@pytest.mark.parametrize("n", [1, 2, 3])
def test_run_shots_exact_matches_born(n):
    r = np.random.default_rng(n)
    gates, ops = _random_gates(r, n, 8)
    psi = orc.run_circuit(ops, n)
    cfg = SignalConfig(n)
    measure = list(range(n))
    counts = se.run_shots(cfg, gates, NoiseModel(), 1000, r, measure, exact=True)[0]
    idx = np.arange(2**n)
    # outcome index bit j is the result for measure[j]
    probs = np.zeros(2**n)
    for x in idx:
        probs[x] = abs(psi[x]) ** 2
    np.testing.assert_allclose(counts / 1000, probs, atol=1e-9)


def test_run_shots_sampled_matches_born():
    r = np.random.default_rng(11)
    gates, ops = _random_gates(r, 2, 6)
    psi = orc.run_circuit(ops, 2)
    N = 20000
    counts = se.run_shots(CFG2, gates, NoiseModel(), N, r, [0, 1])[0]
    p = np.abs(psi) ** 2
    assert counts.sum() == N
    assert np.all(np.abs(counts / N - p) <= 4 * np.sqrt(p * (1 - p) / N) + 1e-12)


def test_run_shots_deterministic():
    gates = [Gate(qm.H, 0), Gate(qm.X, 1, controlled=True)]
    nm = NoiseModel(0.3, 0.01, 0.01, 0.01)
    a = se.run_shots(CFG2, gates, nm, 700, np.random.default_rng(8), [0, 1])
    b = se.run_shots(CFG2, gates, nm, 700, np.random.default_rng(8), [0, 1])
    assert np.array_equal(a, b)


def test_in_band_noise_matches_full_band_statistics():
    # H, then 30 identities, then H: the failure rate follows the depolarizing
    # curve; both noise draws must reproduce it within sampling error
    sigma, N = 0.4, 20000
    gates = [Gate(qm.H)] + [Gate(qm.I2)] * 30
    p1 = 3 * sigma**2 / 64
    expect = 0.5 * (1 - (1 - 4 * p1 / 3) ** 31)
    for full in (False, True):
        c = se.run_shots(CFG1, gates, NoiseModel(awgn_sigma=sigma), N, np.random.default_rng(2), [0],
                         probe=[Gate(qm.H)], full_band=full)[0]
        assert abs(c[1] / N - expect) <= 4 * np.sqrt(expect * (1 - expect) / N)


def test_batched_runner_matches_single_signal_path():
    # the same physical model through apply_gate/measure_qubit (per-sample
    # noise) and through run_shots must give the same outcome distribution
    nm = NoiseModel(awgn_sigma=0.6, gate_amplitude_error_sigma=0.05, gate_phase_error_sigma=0.05)
    gates = [Gate(qm.H, 0), Gate(qm.X, 1, controlled=True), Gate(qm.H, 0)]
    r = np.random.default_rng(21)
    N = 4000
    ones = 0
    for _ in range(N):
        sig = se.basis_signal(0, CFG2)
        for g in gates:
            sig = se.apply_gate(sig, g, nm, r)
        ones += se.measure_qubit(sig, 0, rng=r)[0]
    single = ones / N
    batched = se.run_shots(CFG2, gates, nm, 40000, np.random.default_rng(22), [0], exact=True)[0][1] / 40000
    assert abs(single - batched) <= 4 * np.sqrt(batched * (1 - batched) / N)


def test_checkpoints_reproduce_prefix_runs():
    gates = [Gate(qm.H)] + [Gate(qm.rx(0.3))] * 5
    probe = [Gate(qm.H)]
    counts = se.run_shots(CFG1, gates, NoiseModel(), 10, np.random.default_rng(0), [0], exact=True,
                          probe=probe, checkpoints=[1, 3, 6])
    for row, k in zip(counts, [1, 3, 6]):
        ref = se.run_shots(CFG1, gates[:k] + probe, NoiseModel(), 10, np.random.default_rng(0), [0], exact=True)[0]
        np.testing.assert_allclose(row, ref, atol=1e-9)


def test_substreams_are_independent_and_reproducible():
    a = [g.random() for g in se.substreams(np.random.default_rng(1), 3)]
    b = [g.random() for g in se.substreams(np.random.default_rng(1), 3)]
    assert a == b
    assert len(set(a)) == 3
