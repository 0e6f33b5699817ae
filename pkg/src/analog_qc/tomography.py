"""State and process tomography on top of the signal engine.

State tomography measures every Pauli setting ``P = s_{j_{n-1}} x ... x s_{j_0}``
and records ``B = <P> / 2**n``; linear inversion gives
``rho_bar = sum_P B_P P``, and the maximum-likelihood estimate restricts the
search to ``rho = D D^dag / Tr(D D^dag)`` with a Gaussian least-squares
objective.

Process tomography prepares the four inputs ``|0>, |1>, |+>, |+i>``, runs the
channel under test and projects onto the same four states, giving a 4x4
table of success counts. The chi matrix is fitted as a Cholesky product
mapped onto the trace-preserving set (see
:func:`analog_qc.quantum_math.trace_preserving_normalize`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import quantum_math as qm
from .errors import DomainError, OptimizationError, ValidationError
from .optimizer import MinimizeOptions, ObjectiveSpec, minimize, pack_cholesky, unpack_cholesky
from .signal_engine import NOISELESS, Gate, NoiseModel, SignalConfig, run_shots, substreams

__all__ = [
    "PauliMeanTable",
    "CountsTable",
    "QSTResult",
    "QPTResult",
    "pauli_settings",
    "rotation_gates",
    "estimate_pauli_expectations",
    "exact_pauli_table",
    "qst_linear_inversion",
    "qst_mle",
    "QPT_STATES",
    "QPT_PREP_GATES",
    "qpt_collect_counts",
    "qpt_probabilities",
    "exact_counts_table",
    "qpt_linear_inversion",
    "qpt_mle",
]

CHOLESKY_RIDGE = 1e-6


def _cholesky_start(M, ridge=CHOLESKY_RIDGE):
    """Cholesky factor of a PSD matrix, nudged onto the open cone."""
    M = np.asarray(M, dtype=complex)
    M = (M + M.conj().T) / 2
    scale = max(float(np.real(np.trace(M))), 1e-300)
    try:
        return np.linalg.cholesky(M + ridge * scale * np.eye(M.shape[0]))
    except np.linalg.LinAlgError:
        return None


# -- state tomography ------------------------------------------------------------


def pauli_settings(n: int):
    """Index tuples ``(j_{n-1}, ..., j_0)`` in row-major order."""
    return list(itertools.product(range(1, 5), repeat=int(n)))


# maps a Pauli eigenbasis onto the computational basis (+1 eigenvector -> |0>)
_ROTATIONS = {
    1: (),
    2: (qm.H,),
    3: (qm.SDG, qm.H),
    4: (),
}


def rotation_gates(setting) -> list:
    """Gates that rotate each qubit into the eigenbasis of its Pauli factor."""
    n = len(setting)
    gates = []
    for k in range(n):
        for U in _ROTATIONS[setting[n - 1 - k]]:
            gates.append(Gate(U, qubit=k))
    return gates


@dataclass
class PauliMeanTable:
    """Mean values ``B = <P>/2**n`` for all ``4**n`` Pauli settings.

    ``values[k]`` belongs to ``pauli_settings(n)[k]``. ``shots`` is the
    number of trials per setting, or ``None`` for exact expectations.
    """

    n_qubits: int
    values: np.ndarray
    shots: Optional[int] = None
    seed: Optional[int] = None
    noise: Optional[NoiseModel] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (4**self.n_qubits,):
            raise DomainError(
                f"expected {4 ** self.n_qubits} Pauli mean values, got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("Pauli mean values must be finite")

    @property
    def settings(self):
        return pauli_settings(self.n_qubits)

    def labels(self):
        return [qm.pauli_label(s) for s in self.settings]

    def to_dict(self) -> dict:
        return {
            "kind": "pauli-means",
            "n_qubits": self.n_qubits,
            "settings": self.labels(),
            "means": [float(v) for v in self.values],
            "shots": self.shots,
            "seed": self.seed,
            "noise": None if self.noise is None else self.noise.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> "PauliMeanTable":
        n = int(d["n_qubits"])
        lookup = dict(zip(d["settings"], d["means"]))
        expected = [qm.pauli_label(s) for s in pauli_settings(n)]
        missing = [lab for lab in expected if lab not in lookup]
        if missing:
            raise DomainError(f"Pauli table is missing settings {missing}")
        noise = d.get("noise")
        return cls(
            n,
            np.array([lookup[lab] for lab in expected], dtype=float),
            d.get("shots"),
            d.get("seed"),
            None if noise is None else NoiseModel.from_dict(noise),
        )


def _eigen_signs(setting, n):
    """Eigenvalue (+1/-1) of each joint outcome for a Pauli setting."""
    idx = np.arange(2**n)
    sign = np.ones(2**n)
    for k in range(n):
        if setting[n - 1 - k] != 1:
            sign *= 1 - 2 * ((idx >> k) & 1)
    return sign


def estimate_pauli_expectations(
    prep: Sequence[Gate],
    cfg: SignalConfig,
    noise: NoiseModel,
    shots: int,
    rng,
    exact: bool = False,
) -> PauliMeanTable:
    """Measure every Pauli setting on the state made by ``prep``.

    ``prep`` is a gate program applied to ``|0...0>``. Each non-identity
    setting gets ``shots`` trials on its own sub-stream (spawned from
    ``rng`` in setting order), with the rotation gates appended to the
    preparation and all qubits measured. The all-identity entry is
    ``1/2**n`` by definition.
    """
    n = cfg.qubit_count
    settings = pauli_settings(n)
    streams = substreams(rng, len(settings))
    values = np.empty(len(settings))
    measure = list(range(n))
    for k, setting in enumerate(settings):
        if all(j == 1 for j in setting):
            values[k] = 1.0 / 2**n
            continue
        gates = list(prep) + rotation_gates(setting)
        counts = run_shots(cfg, gates, noise, shots, streams[k], measure, exact=exact)[0]
        values[k] = float(counts @ _eigen_signs(setting, n)) / shots / 2**n
    return PauliMeanTable(n, values, None if exact and not noise.gates_are_noisy else int(shots))


def exact_pauli_table(rho) -> PauliMeanTable:
    """Noise-free table ``Tr(rho P)/2**n`` for a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    n = int(round(np.log2(rho.shape[0])))
    P = qm.pauli_basis(n)
    vals = np.real(np.einsum("kab,ba->k", P, rho)) / 2**n
    return PauliMeanTable(n, vals)


def qst_linear_inversion(table: PauliMeanTable) -> np.ndarray:
    """``rho_bar = sum_P B_P P``; Hermitian with trace ``2**n B_I``, possibly not PSD."""
    P = qm.pauli_basis(table.n_qubits)
    rho = np.einsum("k,kab->ab", table.values, P)
    return (rho + rho.conj().T) / 2


@dataclass
class QSTResult:
    rho: np.ndarray
    objective: float
    status: str
    n_evals: int
    linear: np.ndarray
    trace: list = field(default_factory=list)


def _qst_objective(table: PauliMeanTable):
    n = table.n_qubits
    d = 2**n
    P = qm.pauli_basis(n)
    # Tr(rho P_k) = sum_ab rho_ab (P_k)_ba
    Pt = P.transpose(0, 2, 1).reshape(len(P), -1) / d
    target = table.values
    weight = float(4**n)

    def rho_of(x):
        delta = unpack_cholesky(x, d)
        m = delta @ delta.conj().T
        return m / np.real(np.trace(m))

    def f(x):
        pred = np.real(Pt @ rho_of(x).ravel())
        r = pred - target
        return weight * float(r @ r)

    def f_rho(rho):
        r = np.real(Pt @ np.asarray(rho, dtype=complex).ravel()) - target
        return weight * float(r @ r)

    return f, f_rho, rho_of


def qst_mle(table: PauliMeanTable, full_output: bool = False, opts: Optional[MinimizeOptions] = None):
    """Least-squares maximum-likelihood density matrix.

    Minimizes ``4**n * sum_P (Tr(rho P)/2**n - B_P)**2`` over
    ``rho = D D^dag / Tr(D D^dag)`` starting from the eigenvalue-clipped
    linear inversion. The result is never worse than that starting point.

    Raises
    ------
    OptimizationError
        When the evaluation budget runs out; carries the best iterate.
    """
    d = 2**table.n_qubits
    linear = qst_linear_inversion(table)
    proj = qm.project_to_density_matrix(linear)
    f, f_rho, rho_of = _qst_objective(table)
    start = _cholesky_start(proj)
    if start is None:
        start = np.eye(d, dtype=complex)
    spec = ObjectiveSpec(d * d, f)
    res = minimize(spec, pack_cholesky(start), opts or MinimizeOptions())
    rho = rho_of(res.x)
    rho = (rho + rho.conj().T) / 2
    obj = res.fun
    f_proj = f_rho(proj)
    if f_proj < obj:
        rho, obj = proj, f_proj
    if res.status == "max-evals":
        raise OptimizationError("state MLE ran out of evaluations", rho, obj, res)
    rho = qm.project_to_density_matrix(rho)
    if full_output:
        return QSTResult(rho, obj, res.status, res.n_evals, linear, res.trace)
    return rho


# -- process tomography ------------------------------------------------------------

QPT_STATES = np.array(
    [
        [1, 0],
        [0, 1],
        [1 / np.sqrt(2), 1 / np.sqrt(2)],
        [1 / np.sqrt(2), 1j / np.sqrt(2)],
    ],
    dtype=complex,
)
QPT_LABELS = ("0", "1", "+", "+i")

# single gates with V|0> = |psi_alpha>; the |0> input still passes through
# an identity gate so every cell sees the same number of device gates
QPT_PREP_GATES = (qm.I2, qm.X, qm.H, qm.S @ qm.H)


@dataclass
class CountsTable:
    """Success counts ``N[alpha, beta]`` out of ``C`` trials per cell.

    Rows are inputs, columns are projection settings, both ordered
    ``|0>, |1>, |+>, |+i>``. Counts are integers for sampled data and may be
    fractional expected counts in exact mode.
    """

    counts: np.ndarray
    shots: int
    seed: Optional[int] = None
    noise: Optional[NoiseModel] = None

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float)
        if self.counts.shape != (4, 4):
            raise DomainError(f"counts table must be 4x4, got {self.counts.shape}")
        if int(self.shots) < 1:
            raise DomainError("shots must be at least 1")
        self.shots = int(self.shots)
        tol = 1e-9 * self.shots
        if np.any(self.counts < -tol) or np.any(self.counts > self.shots + tol):
            raise ValidationError("counts must lie in [0, shots]")
        self.counts = np.clip(self.counts, 0.0, float(self.shots))

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def to_dict(self) -> dict:
        integral = np.all(self.counts == np.round(self.counts))
        rows = [[int(v) if integral else float(v) for v in row] for row in self.counts]
        return {
            "kind": "qpt-counts",
            "settings": {"inputs": list(QPT_LABELS), "projections": list(QPT_LABELS)},
            "counts": rows,
            "shots": self.shots,
            "seed": self.seed,
            "noise": None if self.noise is None else self.noise.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> "CountsTable":
        noise = d.get("noise")
        return cls(
            np.array(d["counts"], dtype=float),
            int(d["shots"]),
            d.get("seed"),
            None if noise is None else NoiseModel.from_dict(noise),
        )


def _qpt_design():
    # A[(a, b), (i, j)] = <psi_b|s_i|psi_a><psi_a|s_j|psi_b>
    amp = np.einsum("bx,ixy,ay->abi", QPT_STATES.conj(), qm.PAULIS, QPT_STATES)
    A = np.einsum("abi,abj->abij", amp, amp.conj())
    return A.reshape(16, 16)


_QPT_A = _qpt_design()


def qpt_probabilities(chi) -> np.ndarray:
    """Success probabilities ``<psi_b| E(|psi_a><psi_a|) |psi_b>`` as a 4x4 table."""
    chi = np.asarray(chi, dtype=complex)
    return np.real(_QPT_A @ chi.ravel()).reshape(4, 4)


def exact_counts_table(chi, shots: int) -> CountsTable:
    """Expected counts ``C * probabilities`` for a known channel."""
    return CountsTable(np.clip(qpt_probabilities(chi), 0.0, 1.0) * shots, shots)


def qpt_collect_counts(
    channel: Sequence[Gate],
    shots: int,
    noise: NoiseModel,
    rng,
    exact: bool = False,
    cfg: Optional[SignalConfig] = None,
) -> CountsTable:
    """Run process tomography of a single-qubit gate program on the device.

    For each input ``alpha`` the preparation gate, the ``channel`` gates and
    the inverse preparation of ``beta`` run on one qubit, and outcome 0 of
    the final measurement counts as a success. Each of the 16 cells uses
    its own sub-stream, spawned from ``rng`` in row-major order.
    """
    cfg = cfg or SignalConfig(1)
    if cfg.qubit_count != 1:
        raise DomainError("process tomography is single-qubit")
    channel = list(channel)
    streams = substreams(rng, 16)
    N = np.empty((4, 4))
    for a in range(4):
        for b in range(4):
            gates = [Gate(QPT_PREP_GATES[a])] + channel + [Gate(QPT_PREP_GATES[b].conj().T)]
            c = run_shots(cfg, gates, noise, shots, streams[4 * a + b], [0], exact=exact)
            N[a, b] = c[0, 0]
    return CountsTable(N, shots, noise=noise)


def qpt_linear_inversion(counts: CountsTable) -> np.ndarray:
    """Chi matrix solving the 16 linear equations exactly (Hermitian part)."""
    chi = np.linalg.solve(_QPT_A, counts.frequencies.ravel().astype(complex)).reshape(4, 4)
    return (chi + chi.conj().T) / 2


@dataclass
class QPTResult:
    chi: np.ndarray
    objective: float
    status: str
    n_evals: int
    tp_residual: float
    linear: np.ndarray
    trace: list = field(default_factory=list)


def _qpt_objective(counts: CountsTable):
    freq = counts.frequencies.ravel()
    floor = 1.0 / (10.0 * counts.shots)

    def chi_of(x):
        delta = unpack_cholesky(x, 4)
        return qm.trace_preserving_normalize(delta @ delta.conj().T)

    def f_chi(chi):
        p = np.real(_QPT_A @ chi.ravel())
        r = freq - p
        return 0.5 * float(np.sum(r * r / np.maximum(p, floor)))

    return (lambda x: f_chi(chi_of(x))), f_chi, chi_of


def qpt_mle(counts: CountsTable, full_output: bool = False, opts: Optional[MinimizeOptions] = None):
    """Maximum-likelihood chi matrix from a counts table.

    Minimizes ``L / C`` with ``L = 1/2 sum (N - C P)**2 / (C P)``, where the
    predicted probabilities ``P`` come from ``chi = D D^dag`` mapped onto
    the trace-preserving set, and ``P`` is floored at ``1/(10 C)``. The
    start is the eigenvalue-clipped linear inversion, falling back to the
    identity process when it cannot be factored.

    Raises
    ------
    DomainError
        If every count is zero.
    OptimizationError
        When the evaluation budget runs out; carries the best iterate.
    """
    if not np.any(counts.counts > 0):
        raise DomainError("counts table is all zero")
    linear = qpt_linear_inversion(counts)
    w, v = np.linalg.eigh(linear)
    clipped = (v * np.clip(w, 0.0, None)) @ v.conj().T
    start = None
    if np.real(np.trace(clipped)) > 0:
        start = _cholesky_start(qm.trace_preserving_normalize(clipped))
    if start is None:
        start = _cholesky_start(qm.chi_from_unitary(qm.I2))
    f, f_chi, chi_of = _qpt_objective(counts)
    res = minimize(ObjectiveSpec(16, f), pack_cholesky(start), opts or MinimizeOptions())
    chi = chi_of(res.x)
    if res.status == "max-evals":
        raise OptimizationError("process MLE ran out of evaluations", chi, res.fun, res)
    resid = qm.tp_residual(chi)
    if full_output:
        return QPTResult(chi, res.fun, res.status, res.n_evals, resid, linear, res.trace)
    return chi
