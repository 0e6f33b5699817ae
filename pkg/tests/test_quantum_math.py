import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as orc
from analog_qc import channels as ch
from analog_qc import quantum_math as qm
from analog_qc.errors import DomainError, ValidationError

seeds = st.integers(0, 2**32 - 1)

# printed two-qubit estimate for the singlet experiment
RHO_HAT_PRINTED = np.array(
    [
        [0.0001, -0.0011 - 0.0082j, 0.0008 + 0.0075j, -0.0006 + 0.0004j],
        [-0.0011 + 0.0082j, 0.5412, -0.4968 - 0.0082j, 0.0019 - 0.0364j],
        [0.0008 - 0.0075j, -0.4968 + 0.0082j, 0.4562, -0.0012 + 0.0335j],
        [-0.0006 + 0.0004j, 0.0019 + 0.0364j, -0.0012 - 0.0335j, 0.0025],
    ]
)
SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)


# -- Pauli tensors ---------------------------------------------------------------------


def test_pauli_identity_pair():
    np.testing.assert_array_equal(qm.pauli_tensor((1, 1)), np.eye(4))


def test_pauli_z():
    np.testing.assert_array_equal(qm.pauli_tensor((4,)), np.diag([1, -1]))


def test_pauli_order_matches_kron():
    np.testing.assert_array_equal(qm.pauli_tensor((2, 4)), np.kron(orc.X, orc.Z))


@pytest.mark.parametrize("n", [1, 2])
def test_pauli_orthonormal(n):
    basis = qm.pauli_basis(n)
    d = 2**n
    gram = np.array([[np.trace(a.conj().T @ b) / d for b in basis] for a in basis])
    np.testing.assert_allclose(gram, np.eye(4**n), atol=1e-15)


@pytest.mark.parametrize("bad", [(0,), (5,), ()])
def test_pauli_index_range(bad):
    with pytest.raises(DomainError):
        qm.pauli_tensor(bad)


def test_pauli_elements_are_hermitian_unitary():
    for P in qm.PAULIS[1:]:
        np.testing.assert_allclose(P, P.conj().T)
        np.testing.assert_allclose(P @ P, np.eye(2))
        assert np.trace(P) == 0


# -- state fidelity ---------------------------------------------------------------------


@given(seeds)
def test_fidelity_pure_self(seed):
    psi = qm.random_state_vector(np.random.default_rng(seed), 4)
    assert qm.state_fidelity(np.outer(psi, psi.conj()), psi) == pytest.approx(1.0, abs=1e-12)


@given(seeds)
def test_fidelity_maximally_mixed(seed):
    psi = qm.random_state_vector(np.random.default_rng(seed), 4)
    assert qm.state_fidelity(np.eye(4) / 4, psi) == pytest.approx(0.5, abs=1e-12)


@given(seeds, st.floats(0, 2 * np.pi))
def test_fidelity_global_phase_invariant(seed, phase):
    r = np.random.default_rng(seed)
    rho = qm.random_density_matrix(r, 2)
    psi = qm.random_state_vector(r, 2)
    assert qm.state_fidelity(rho, psi) == pytest.approx(qm.state_fidelity(rho, np.exp(1j * phase) * psi), abs=1e-12)


def test_printed_singlet_estimate_fidelity():
    # the printed matrix is rounded to 4 decimals and its (1,4)/(4,1) pair is
    # not conjugate-symmetric, so evaluate <psi|rho|psi> on its Hermitian part
    herm = (RHO_HAT_PRINTED + RHO_HAT_PRINTED.conj().T) / 2
    F = np.sqrt((SINGLET.conj() @ herm @ SINGLET).real)
    assert F == pytest.approx(0.9978, abs=5e-4)
    with pytest.raises(ValidationError):
        qm.state_fidelity(RHO_HAT_PRINTED, SINGLET)
    # after projection onto valid states the package agrees with the oracle
    assert qm.state_fidelity(qm.project_to_density_matrix(herm), SINGLET) == pytest.approx(0.9978, abs=5e-4)


def test_fidelity_rejects_invalid_rho():
    with pytest.raises(ValidationError):
        qm.state_fidelity(np.diag([1.2, -0.2]), [1, 0])


# -- PSD square root ---------------------------------------------------------------------


def test_sqrt_identity_and_diag():
    np.testing.assert_allclose(qm.matrix_sqrt_psd(np.eye(3)), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(qm.matrix_sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)


@given(seeds, st.integers(1, 4))
def test_sqrt_round_trip(seed, dim):
    r = np.random.default_rng(seed)
    G = r.standard_normal((dim, dim)) + 1j * r.standard_normal((dim, dim))
    M = G @ G.conj().T
    s = qm.matrix_sqrt_psd(M)
    np.testing.assert_allclose(s @ s, M, atol=1e-8 * max(1, np.abs(M).max()))
    np.testing.assert_allclose(s, s.conj().T, atol=1e-12)


def test_sqrt_clips_tiny_negative_and_rejects_large():
    np.testing.assert_allclose(qm.matrix_sqrt_psd(np.diag([1.0, -1e-12])), np.diag([1.0, 0.0]))
    with pytest.raises(ValidationError):
        qm.matrix_sqrt_psd(np.diag([1.0, -1e-3]))


# -- chi channels ------------------------------------------------------------------------


def test_identity_chi_leaves_state():
    chi = np.zeros((4, 4))
    chi[0, 0] = 1
    rho = orc.random_rho(np.random.default_rng(0), 2)
    np.testing.assert_allclose(qm.apply_chi_channel(chi, rho), rho, atol=1e-15)


def test_full_depolarization_gives_maximally_mixed():
    out = qm.apply_chi_channel(ch.depolarizing_chi(0.75), np.diag([1.0, 0.0]))
    np.testing.assert_allclose(out, np.eye(2) / 2, atol=1e-15)


@given(seeds)
def test_chi_channel_matches_double_loop_oracle(seed):
    r = np.random.default_rng(seed)
    chi = qm.random_channel_chi(r)
    rho = orc.random_rho(r, 2)
    out = qm.apply_chi_channel(chi, rho)
    np.testing.assert_allclose(out, orc.chi_apply(chi, rho), atol=1e-12)
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-9)
    assert np.linalg.eigvalsh(out).min() > -1e-9


@given(seeds)
def test_rank_one_chi_is_unitary_conjugation(seed):
    r = np.random.default_rng(seed)
    V = orc.haar(r)
    rho = orc.random_rho(r, 2)
    chi = qm.chi_from_unitary(V)
    np.testing.assert_allclose(chi, orc.chi_of_unitary(V), atol=1e-14)
    np.testing.assert_allclose(qm.apply_chi_channel(chi, rho), V @ rho @ V.conj().T, atol=1e-9)


def test_chi_validation():
    with pytest.raises(ValidationError):
        qm.apply_chi_channel(np.eye(4), np.eye(2) / 2)  # not trace preserving
    bad = np.zeros((4, 4))
    bad[0, 0] = 1.5
    bad[1, 1] = -0.5
    with pytest.raises(ValidationError):
        qm.validate_chi(bad)


@given(seeds)
def test_kraus_round_trip(seed):
    r = np.random.default_rng(seed)
    V = qm.haar_unitary(r, 4)[:, :2]
    kraus = [V[0:2], V[2:4]]
    chi = qm.chi_from_kraus(kraus)
    rho = orc.random_rho(r, 2)
    np.testing.assert_allclose(qm.apply_chi_channel(chi, rho), sum(K @ rho @ K.conj().T for K in kraus), atol=1e-12)
    assert qm.tp_residual(chi) < 1e-12


@given(seeds)
def test_ptm_round_trip(seed):
    chi = qm.random_channel_chi(np.random.default_rng(seed))
    np.testing.assert_allclose(qm.ptm_to_chi(qm.chi_to_ptm(chi)), chi, atol=1e-12)


@given(seeds, st.floats(0.0, 1.0))
def test_trace_preserving_normalize(seed, shrink):
    r = np.random.default_rng(seed)
    chi = qm.random_channel_chi(r)
    # break trace preservation with a non-TP positive perturbation
    v = r.standard_normal(4) + 1j * r.standard_normal(4)
    raw = chi * (0.5 + shrink) + 0.1 * np.outer(v, v.conj())
    fixed = qm.trace_preserving_normalize(raw)
    assert qm.tp_residual(fixed) < 1e-10
    assert np.linalg.eigvalsh(fixed).min() > -1e-12
    # already-TP input is a fixed point
    np.testing.assert_allclose(qm.trace_preserving_normalize(chi), chi, atol=1e-10)


# -- gate fidelity ----------------------------------------------------------------------


def test_gate_fidelity_ideal():
    assert qm.gate_fidelity(qm.chi_from_unitary(qm.I2), qm.I2) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("p", [0.006, 0.01, 0.1, 0.3, 0.6])
def test_gate_fidelity_depolarizing(p):
    assert qm.gate_fidelity(ch.depolarizing_chi(p), qm.I2) == pytest.approx(np.sqrt(1 - 2 * p / 3), abs=1e-6)


@given(seeds)
def test_gate_fidelity_exact_unitary(seed):
    V = orc.haar(np.random.default_rng(seed))
    assert qm.gate_fidelity(qm.chi_from_unitary(V), V) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_gate_fidelity_matches_dense_bruteforce(seed):
    r = np.random.default_rng(seed)
    chi = qm.random_channel_chi(r, kraus_rank=2)
    chi = 0.2 * chi + 0.8 * qm.chi_from_unitary(qm.I2)
    U = qm.rz(0.1)
    brute = orc.gate_fidelity_bruteforce(lambda rho: orc.chi_apply(chi, rho), U, 91, 180)
    F = qm.gate_fidelity(chi, U)
    assert F <= brute + 1e-12
    assert F == pytest.approx(brute, abs=2e-4)


@pytest.mark.parametrize("seed", range(3))
def test_gate_fidelity_min_not_beaten_by_mixed_states(seed):
    # Uhlmann fidelity of random mixed inputs never goes below the pure-state minimum
    r = np.random.default_rng(seed)
    chi = 0.3 * qm.random_channel_chi(r) + 0.7 * qm.chi_from_unitary(qm.I2)
    U = qm.rx(0.2)
    F = qm.gate_fidelity(chi, U)
    for _ in range(500):
        rho = orc.random_rho(r, 2)
        out = orc.chi_apply(chi, rho)
        assert orc.uhlmann(out, U @ rho @ U.conj().T) >= F - 1e-9


def test_gate_fidelity_below_every_grid_point():
    r = np.random.default_rng(7)
    chi = 0.5 * qm.random_channel_chi(r) + 0.5 * qm.chi_from_unitary(qm.I2)
    res = qm.gate_fidelity(chi, qm.I2, full_output=True)
    for th in np.linspace(0, np.pi, 16):
        for ph in np.linspace(0, 2 * np.pi, 16):
            psi = np.array([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)])
            rho = np.outer(psi, psi.conj())
            assert res.value <= orc.uhlmann(qm.apply_chi_channel(chi, rho), rho) + 1e-12
    assert res.status == "converged"
    assert np.linalg.norm(res.bloch_vector) == pytest.approx(1.0)


# -- process fidelity --------------------------------------------------------------------


@given(seeds)
def test_process_fidelity_self(seed):
    V = orc.haar(np.random.default_rng(seed))
    assert qm.process_fidelity(qm.chi_from_unitary(V), V) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("p", [0.0, 0.05, 0.3, 0.75, 1.0])
def test_process_fidelity_depolarizing(p):
    e1 = np.zeros(4)
    e1[0] = 1
    chi = ch.depolarizing_chi(p)
    assert qm.process_fidelity(chi, qm.I2) == pytest.approx(1 - p, abs=1e-12)
    assert qm.process_fidelity(chi, qm.I2) == pytest.approx(np.trace(chi @ np.outer(e1, e1)).real, abs=1e-15)


@given(seeds)
def test_process_fidelity_equals_ptm_overlap(seed):
    r = np.random.default_rng(seed)
    chi = qm.random_channel_chi(r)
    V = orc.haar(r)
    R, RV = qm.chi_to_ptm(chi), qm.unitary_ptm(V)
    assert qm.process_fidelity(chi, V) == pytest.approx(np.trace(RV.T @ R) / 4, abs=1e-12)


# -- unitary helpers ------------------------------------------------------------------


def test_check_unitary():
    with pytest.raises(ValidationError):
        qm.check_unitary(np.array([[1, 0], [0, 2]]))
    with pytest.raises(ValidationError):
        qm.check_unitary(np.eye(3))
    for name, U in qm.NAMED_GATES.items():
        np.testing.assert_allclose(U @ U.conj().T, np.eye(2), atol=1e-15, err_msg=name)


@pytest.mark.parametrize("dim", [2, 4])
def test_random_objects_are_valid(dim):
    r = np.random.default_rng(1)
    qm.validate_density_matrix(qm.random_density_matrix(r, dim))
    assert np.linalg.norm(qm.random_state_vector(r, dim)) == pytest.approx(1.0)
    qm.validate_chi(qm.random_channel_chi(r))


def test_pauli_coefficients_reconstruct():
    r = np.random.default_rng(3)
    A = r.standard_normal((2, 2)) + 1j * r.standard_normal((2, 2))
    c = qm.pauli_coefficients(A)
    np.testing.assert_allclose(sum(ci * P for ci, P in zip(c, qm.PAULIS)), A, atol=1e-14)


def test_pauli_labels():
    assert qm.pauli_label((1, 2, 3, 4)) == "IXYZ"
    assert [qm.pauli_label(i) for i in itertools.product(range(1, 5), repeat=1)] == list("IXYZ")
