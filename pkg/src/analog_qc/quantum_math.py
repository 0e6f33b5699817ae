"""Dense linear algebra for one- and two-qubit objects.

Conventions
-----------
* Amplitude vectors are little-endian: bit ``k`` of the index is qubit ``k``.
* Pauli indices are 1-based as ``1..4 -> I, X, Y, Z``. Multi-qubit Pauli
  labels are ordered most-significant qubit first, ``(j_{n-1}, ..., j_0)``,
  so ``pauli_tensor`` is a plain left-to-right Kronecker product.
* A single-qubit channel is described by its 4x4 chi matrix in the
  (unnormalized) Pauli basis, ``E(rho) = sum_ij chi_ij s_i rho s_j^dag``.
  A 2x2 operator ``A`` expands as ``A = sum_i (Tr(s_i A) / 2) s_i``, so a
  unitary ``U`` has the rank-one chi matrix ``u u^dag`` with trace 1.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .optimizer import MinimizeOptions, ObjectiveSpec, minimize

PSD_CLIP = 1e-9
HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
TP_TOL = 1e-6
UNITARY_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([I2, X, Y, Z])
PAULI_LABELS = "IXYZ"

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
SDG = S.conj().T
T = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)

NAMED_GATES = {
    "I": I2,
    "X": X,
    "Y": Y,
    "Z": Z,
    "H": H,
    "S": S,
    "SDG": SDG,
    "T": T,
}


def rx(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def is_unitary(U, atol=UNITARY_TOL) -> bool:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=atol, rtol=0)


def check_unitary(U, atol=UNITARY_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 matrix, got shape {U.shape}")
    if not is_unitary(U, atol):
        raise ValidationError("gate matrix is not unitary")
    return U


# -- Pauli machinery -------------------------------------------------------


def pauli_tensor(indices) -> np.ndarray:
    """Kronecker product of Pauli matrices, most-significant qubit first.

    >>> pauli_tensor((4,)).real
    array([[ 1.,  0.],
           [ 0., -1.]])
    """
    indices = tuple(int(j) for j in indices)
    if not indices:
        raise DomainError("at least one Pauli index is required")
    out = np.ones((1, 1), dtype=complex)
    for j in indices:
        if not 1 <= j <= 4:
            raise DomainError(f"Pauli index {j} not in 1..4")
        out = np.kron(out, PAULIS[j - 1])
    return out


@functools.lru_cache(maxsize=None)
def _pauli_basis(n: int) -> np.ndarray:
    import itertools

    mats = [pauli_tensor(idx) for idx in itertools.product(range(1, 5), repeat=n)]
    arr = np.stack(mats)
    arr.setflags(write=False)
    return arr


def pauli_basis(n: int) -> np.ndarray:
    """All ``4**n`` Pauli tensors, in row-major order of their index tuples."""
    return _pauli_basis(int(n))


def pauli_label(indices) -> str:
    return "".join(PAULI_LABELS[j - 1] for j in indices)


def pauli_coefficients(A) -> np.ndarray:
    """Coefficients ``Tr(s_i A) / 2`` of a 2x2 operator."""
    A = np.asarray(A, dtype=complex)
    return np.einsum("kij,ji->k", PAULIS, A) / 2


# -- states ------------------------------------------------------------------


def validate_density_matrix(rho, atol=1e-9) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    d = rho.shape[0]
    if d & (d - 1):
        raise ValidationError(f"density matrix dimension {d} is not a power of two")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValidationError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise ValidationError(f"density matrix trace is {np.trace(rho).real:.12g}, not 1")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -atol:
        raise ValidationError("density matrix has a negative eigenvalue")
    return rho


def pure_state_density(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def state_fidelity(rho, psi) -> float:
    """Fidelity ``sqrt(<psi|rho|psi>)`` of a mixed estimate to a pure target."""
    rho = validate_density_matrix(rho)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (rho.shape[0],):
        raise DomainError("state vector and density matrix dimensions differ")
    if abs(np.linalg.norm(psi) - 1) > 1e-9:
        raise ValidationError("state vector is not normalized")
    overlap = float(np.real(psi.conj() @ rho @ psi))
    return float(np.sqrt(min(max(overlap, 0.0), 1.0)))


def project_to_density_matrix(M) -> np.ndarray:
    """Nearest-by-eigenvalue-clipping valid density matrix to a Hermitian ``M``."""
    M = np.asarray(M, dtype=complex)
    M = (M + M.conj().T) / 2
    w, v = np.linalg.eigh(M)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        return np.eye(M.shape[0], dtype=complex) / M.shape[0]
    w = w / w.sum()
    return (v * w) @ v.conj().T


def matrix_sqrt_psd(M, clip=PSD_CLIP) -> np.ndarray:
    """Hermitian PSD square root.

    Eigenvalues in ``[-clip, 0)`` are treated as zero; anything more
    negative raises :class:`ValidationError`.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("matrix square root needs a square matrix")
    if np.max(np.abs(M - M.conj().T), initial=0.0) > HERMITIAN_TOL * max(1.0, np.abs(M).max()):
        raise ValidationError("matrix is not Hermitian")
    w, v = np.linalg.eigh((M + M.conj().T) / 2)
    if w.min() < -clip:
        raise ValidationError(f"matrix is not PSD (min eigenvalue {w.min():.3g})")
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def uhlmann_fidelity(rho, sigma) -> float:
    """Root fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))``."""
    r = matrix_sqrt_psd(rho)
    inner = r @ np.asarray(sigma, dtype=complex) @ r
    inner = (inner + inner.conj().T) / 2
    w = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(np.sqrt(w).sum())


# -- chi matrices -----------------------------------------------------------


def chi_from_unitary(U) -> np.ndarray:
    u = pauli_coefficients(U)
    return np.outer(u, u.conj())


def chi_from_kraus(kraus_ops) -> np.ndarray:
    chi = np.zeros((4, 4), dtype=complex)
    for K in kraus_ops:
        c = pauli_coefficients(K)
        chi += np.outer(c, c.conj())
    return chi


@functools.lru_cache(maxsize=None)
def _kraus_sum_map() -> np.ndarray:
    # vec(sum_ij chi_ij s_j^dag s_i) = map @ vec(chi)
    m = np.einsum("jba,ibc->acij", PAULIS.conj(), PAULIS).reshape(4, 16)
    m.setflags(write=False)
    return m


def kraus_sum(chi) -> np.ndarray:
    """``sum_ij chi_ij s_j^dag s_i``; the identity for trace-preserving chi."""
    chi = np.asarray(chi, dtype=complex)
    return (_kraus_sum_map() @ chi.ravel()).reshape(2, 2)


def tp_residual(chi) -> float:
    return float(np.max(np.abs(kraus_sum(chi) - I2)))


def validate_chi(chi, tp_tol=TP_TOL) -> np.ndarray:
    chi = np.asarray(chi, dtype=complex)
    if chi.shape != (4, 4):
        raise ValidationError(f"chi matrix must be 4x4, got {chi.shape}")
    if np.max(np.abs(chi - chi.conj().T)) > HERMITIAN_TOL:
        raise ValidationError("chi matrix is not Hermitian")
    if np.linalg.eigvalsh((chi + chi.conj().T) / 2).min() < -PSD_CLIP:
        raise ValidationError("chi matrix is not positive semidefinite")
    res = tp_residual(chi)
    if res > tp_tol:
        raise ValidationError(f"chi matrix is not trace preserving (residual {res:.3g})")
    return chi


def apply_chi_channel(chi, rho, check=True) -> np.ndarray:
    """``sum_ij chi_ij s_i rho s_j^dag`` for a single-qubit ``rho``."""
    chi = validate_chi(chi) if check else np.asarray(chi, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DomainError("chi channels act on single-qubit density matrices")
    left = PAULIS @ rho  # s_i rho
    out = np.einsum("ij,iab,jcb->ac", chi, left, PAULIS.conj())
    return out


@functools.lru_cache(maxsize=None)
def _pauli_product_map() -> np.ndarray:
    # vec(W) = map @ vec(M) with W[a, i] = Tr(s_i s_a M) / 2
    m = np.einsum("iab,jbc->jica", PAULIS, PAULIS).reshape(16, 4) / 2
    m.setflags(write=False)
    return m


def _inv_sqrt_2x2(K, eps):
    """``K^{-1/2}`` for a 2x2 Hermitian matrix, eigenvalues floored at ``eps``."""
    a, d = K[0, 0].real, K[1, 1].real
    b = K[0, 1]
    det = a * d - (b.real**2 + b.imag**2)
    tr = a + d
    if det > eps * max(tr, 1.0):
        # sqrt(K) = (K + sqrt(det) I) / sqrt(tr + 2 sqrt(det)), inverted in closed form
        sd = np.sqrt(det)
        t = np.sqrt(tr + 2 * sd)
        inv_root = np.array([[d + sd, -b], [-np.conj(b), a + sd]]) / (t * sd)
        return inv_root
    w, v = np.linalg.eigh(K)
    w = np.clip(w, eps, None)
    return (v / np.sqrt(w)) @ v.conj().T


def trace_preserving_normalize(chi, eps=1e-14) -> np.ndarray:
    """Map a PSD chi matrix to the nearest-in-form trace-preserving one.

    With ``K = sum_k K_k^dag K_k`` the Kraus sum of ``chi``, the returned
    matrix describes ``rho -> E(K^{-1/2} rho K^{-1/2})``, which is
    completely positive and trace preserving. Trace-preserving input is a
    fixed point.
    """
    chi = np.asarray(chi, dtype=complex)
    ks = kraus_sum(chi)
    ks = (ks + ks.conj().T) / 2
    m = _inv_sqrt_2x2(ks, eps)
    # W[a, i] = Tr(s_i s_a M) / 2 expands s_a M in the Pauli basis
    W = (_pauli_product_map() @ m.ravel()).reshape(4, 4)
    out = W.T @ chi @ W.conj()
    return (out + out.conj().T) / 2


def chi_to_ptm(chi) -> np.ndarray:
    """Pauli transfer matrix ``R_kl = Tr(s_k E(s_l)) / 2`` (real 4x4)."""
    chi = np.asarray(chi, dtype=complex)
    R = np.empty((4, 4))
    for l in range(4):
        out = apply_chi_channel(chi, PAULIS[l], check=False)
        R[:, l] = np.real(np.einsum("kab,ba->k", PAULIS, out)) / 2
    return R


@functools.lru_cache(maxsize=None)
def _ptm_to_chi_map() -> np.ndarray:
    # chi -> vec(PTM) is linear; build and invert it once
    A = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        for j in range(4):
            e = np.zeros((4, 4), dtype=complex)
            e[i, j] = 1.0
            R = np.empty((4, 4), dtype=complex)
            for l in range(4):
                out = np.einsum("ab,bc,dc->ad", PAULIS[i], PAULIS[l], PAULIS[j].conj())
                R[:, l] = np.einsum("kab,ba->k", PAULIS, out) / 2
            A[:, 4 * i + j] = R.ravel()
    inv = np.linalg.inv(A)
    inv.setflags(write=False)
    return inv


def ptm_to_chi(R) -> np.ndarray:
    chi = (_ptm_to_chi_map() @ np.asarray(R, dtype=complex).ravel()).reshape(4, 4)
    return (chi + chi.conj().T) / 2


def unitary_ptm(U) -> np.ndarray:
    return chi_to_ptm(chi_from_unitary(U))


def process_fidelity(chi_hat, U) -> float:
    """Overlap ``Tr(chi_hat u u^dag)`` with the ideal rank-one process."""
    u = pauli_coefficients(check_unitary(U))
    val = u.conj() @ np.asarray(chi_hat, dtype=complex) @ u
    return float(np.real(val))


# -- gate fidelity ------------------------------------------------------------


@dataclass
class GateFidelityResult:
    value: float
    bloch_vector: np.ndarray
    status: str

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def _bloch(theta, phi):
    return np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1
    )


def _pure_fidelity_sq(R, RU, r):
    # <U psi| E(psi) |U psi> for Bloch vectors r (..., 3)
    out_vec = R[1:, 0] + r @ R[1:, 1:].T
    ideal_vec = r @ RU[1:, 1:].T
    return 0.5 * (1.0 + np.sum(out_vec * ideal_vec, axis=-1))


def gate_fidelity(chi, U, grid=(32, 64), refine=True, full_output=False):
    """Worst-case fidelity of a channel against a unitary.

    Minimizes the root fidelity between ``E(rho)`` and ``U rho U^dag`` over
    pure input states (for pure inputs it reduces to
    ``sqrt(<U psi|E(psi)|U psi>)``): first on a ``theta x phi`` grid over the
    Bloch sphere, then by local refinement from the best grid point.
    Joint concavity of the fidelity puts the minimum over all states on a
    pure state, so the restriction is exact.
    """
    chi = validate_chi(chi)
    U = check_unitary(U)
    R = chi_to_ptm(chi)
    RU = unitary_ptm(U)
    n_theta, n_phi = grid
    theta = np.linspace(0.0, np.pi, n_theta)
    phi = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    vals = _pure_fidelity_sq(R, RU, _bloch(tt, pp))
    k = int(np.argmin(vals))
    best = np.array([tt.flat[k], pp.flat[k]])
    best_f2 = float(vals.flat[k])
    status = "converged"
    if refine:
        spec = ObjectiveSpec(
            2, lambda x: float(_pure_fidelity_sq(R, RU, _bloch(x[0], x[1])))
        )
        res = minimize(spec, best, MinimizeOptions(max_evals=2000, f_tol=1e-14, x_tol=1e-10))
        if res.fun <= best_f2:
            best, best_f2 = res.x, res.fun
        status = res.status
    value = float(np.sqrt(min(max(best_f2, 0.0), 1.0)))
    if full_output:
        return GateFidelityResult(value, _bloch(best[0], best[1]), status)
    return value


# -- random objects (used by tests and acceptance runs) -----------------------


def haar_unitary(rng, dim=2) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state_vector(rng, dim) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density_matrix(rng, dim, rank=None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_channel_chi(rng, kraus_rank=4) -> np.ndarray:
    """Chi matrix of a random CPTP map from a Haar-random Stinespring isometry."""
    V = haar_unitary(rng, 2 * kraus_rank)[:, :2]
    kraus = [V[2 * k : 2 * k + 2, :] for k in range(kraus_rank)]
    return chi_from_kraus(kraus)
