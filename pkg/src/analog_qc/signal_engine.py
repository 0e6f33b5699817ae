"""Classical signal representation of qubit registers.

A computational basis state ``|x>`` of an n-qubit register is the complex
waveform ``phi_x(t) = prod_k exp((-1)**x_k * i * w_k * t)`` with carrier
frequencies ``w_k = 2**k * w_0``; a general pure state is the linear
combination of these waveforms weighted by its amplitudes. Signals are
sampled uniformly over one period ``T = 2 pi / w_0``, and inner products
are sample means of ``conj(a) * b``, which is exact for these band-limited
products as long as ``samples_per_period >= 2**(n+1)``.

Gates split a signal into the two partial projections on a qubit, scale
them by complex gains, remodulate them onto the qubit's carriers and sum.
Measurements compare the RMS levels of the two partial projections and
use a uniform hidden variable to pick an outcome.

Device imperfections are described by :class:`NoiseModel`. Gate noise is
applied as multiplicative branch-gain errors plus white Gaussian noise
whose level is referenced to the RMS of the gate input, so a unit-level
signal sees exactly ``awgn_sigma`` per quadrature per sample.

Random streams
--------------
Every stochastic call takes a ``numpy.random.Generator``. Independent
sub-streams for parallel or per-cell work are derived with
:func:`substreams`, which uses ``Generator.spawn`` (SeedSequence
spawning), so children depend only on the parent's seed sequence and the
number of previous spawns.
"""

from __future__ import annotations

import functools
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DegenerateStateError, DomainError, UnsupportedConfigurationError, ValidationError
from .quantum_math import check_unitary

MAX_QUBITS = 3
NORM_TOL = 1e-9
TRIAL_CHUNK = 256

__all__ = [
    "SignalConfig",
    "NoiseModel",
    "StateSignal",
    "Gate",
    "basis_signal",
    "synthesize",
    "inner_product",
    "decompose",
    "partial_project",
    "reassemble",
    "apply_1q_gate",
    "apply_controlled_gate",
    "rms",
    "measure_qubit",
    "outcome_probability",
    "add_noise",
    "run_shots",
    "substreams",
]


@dataclass(frozen=True)
class SignalConfig:
    """Carrier layout and sampling grid of a register.

    ``samples_per_period`` defaults to ``64 * 2**(n-1)``; it must be a
    power of two and at least ``4 * 2**(n-1)`` so that every product of
    carriers stays below the Nyquist limit.
    """

    qubit_count: int = 1
    base_frequency_hz: float = 1000.0
    samples_per_period: Optional[int] = None

    def __post_init__(self):
        n = self.qubit_count
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise DomainError(f"qubit_count must be a positive integer, got {n!r}")
        if n > MAX_QUBITS:
            raise UnsupportedConfigurationError(
                f"at most {MAX_QUBITS} qubits are supported (bandwidth grows as 2**n)"
            )
        if not (np.isfinite(self.base_frequency_hz) and self.base_frequency_hz > 0):
            raise DomainError("base_frequency_hz must be positive")
        spp = self.samples_per_period
        if spp is None:
            object.__setattr__(self, "samples_per_period", 64 * 2 ** (n - 1))
            spp = self.samples_per_period
        spp = int(spp)
        if spp < 4 * 2 ** (n - 1) or spp & (spp - 1):
            raise DomainError(
                f"samples_per_period must be a power of two >= {4 * 2 ** (n - 1)}, got {spp}"
            )
        object.__setattr__(self, "samples_per_period", spp)

    @property
    def dimension(self) -> int:
        return 2**self.qubit_count

    @property
    def period(self) -> float:
        return 1.0 / self.base_frequency_hz

    def angular_frequency(self, k: int) -> float:
        return 2 * np.pi * self.base_frequency_hz * 2**k

    def times(self) -> np.ndarray:
        return np.arange(self.samples_per_period) * (self.period / self.samples_per_period)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class NoiseModel:
    """Device imperfections.

    Attributes
    ----------
    awgn_sigma
        Per-quadrature std of white complex Gaussian noise added after each
        gate, relative to the RMS level of the gate input.
    gate_amplitude_error_sigma
        Std of the relative gain error on each of the four gate branches.
    gate_phase_error_sigma
        Std of the phase error (radians) on each gate branch.
    rms_meter_error_sigma
        Std of the relative error on each RMS reading.
    """

    awgn_sigma: float = 0.0
    gate_amplitude_error_sigma: float = 0.0
    gate_phase_error_sigma: float = 0.0
    rms_meter_error_sigma: float = 0.0

    def __post_init__(self):
        for name, val in asdict(self).items():
            if not np.isfinite(val) or val < 0:
                raise ValidationError(f"{name} must be finite and non-negative, got {val!r}")

    @property
    def is_zero(self) -> bool:
        return not any(asdict(self).values())

    @property
    def gates_are_noisy(self) -> bool:
        return bool(self.awgn_sigma or self.gate_amplitude_error_sigma or self.gate_phase_error_sigma)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "NoiseModel":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown noise model fields: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})


NOISELESS = NoiseModel()


@dataclass(eq=False)
class StateSignal:
    """Sampled waveform over one period.

    ``qubits`` lists the register qubits whose carriers the signal spans;
    it is the full register for ordinary states and a subset for partial
    projections. Amplitude index bit ``j`` refers to ``qubits[j]``.
    """

    samples: np.ndarray
    config: SignalConfig
    qubits: tuple = field(default=None)

    def __post_init__(self):
        if self.qubits is None:
            self.qubits = tuple(range(self.config.qubit_count))
        self.qubits = tuple(int(q) for q in self.qubits)
        if list(self.qubits) != sorted(set(self.qubits)):
            raise DomainError(f"qubits must be sorted and distinct, got {self.qubits}")
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.shape != (self.config.samples_per_period,):
            raise DomainError(
                f"expected {self.config.samples_per_period} samples, got shape {self.samples.shape}"
            )

    def __len__(self):
        return self.samples.shape[0]

    def copy(self) -> "StateSignal":
        return StateSignal(self.samples.copy(), self.config, self.qubits)


@dataclass(frozen=True, eq=False)
class Gate:
    """One circuit step: a 2x2 unitary on ``qubit``, optionally controlled.

    A controlled gate uses qubit 0 as control and requires a two-qubit
    register; ``qubit`` is then the target.
    """

    matrix: np.ndarray
    qubit: int = 0
    controlled: bool = False

    def __post_init__(self):
        object.__setattr__(self, "matrix", check_unitary(self.matrix))


# -- basis ---------------------------------------------------------------------


def _carrier_sign(bit: int) -> int:
    return 1 - 2 * bit


@functools.lru_cache(maxsize=64)
def _basis(cfg: SignalConfig, qubits: tuple) -> np.ndarray:
    t = cfg.times()
    D = 2 ** len(qubits)
    B = np.empty((cfg.samples_per_period, D), dtype=complex)
    for x in range(D):
        freq = 0.0
        for j, q in enumerate(qubits):
            freq += _carrier_sign((x >> j) & 1) * cfg.angular_frequency(q)
        B[:, x] = np.exp(1j * freq * t)
    B.setflags(write=False)
    return B


def basis_matrix(cfg: SignalConfig, qubits=None) -> np.ndarray:
    """Sampled basis signals as columns, shape ``(samples_per_period, 2**len(qubits))``."""
    qubits = tuple(range(cfg.qubit_count)) if qubits is None else tuple(qubits)
    return _basis(cfg, qubits)


@functools.lru_cache(maxsize=64)
def _carrier(cfg: SignalConfig, qubit: int, bit: int) -> np.ndarray:
    c = np.exp(1j * _carrier_sign(bit) * cfg.angular_frequency(qubit) * cfg.times())
    c.setflags(write=False)
    return c


def basis_signal(x: int, cfg: SignalConfig) -> StateSignal:
    if not 0 <= x < cfg.dimension:
        raise DomainError(f"basis index {x} out of range for {cfg.qubit_count} qubits")
    return StateSignal(basis_matrix(cfg)[:, x].copy(), cfg)


def synthesize(amps, cfg: SignalConfig, normalized: bool = True, qubits=None) -> StateSignal:
    """Signal for an amplitude vector.

    With ``normalized=True`` (the default) the amplitudes must have unit
    norm; pass ``normalized=False`` to build unnormalized signals on
    purpose, e.g. for noise studies.
    """
    qubits = tuple(range(cfg.qubit_count)) if qubits is None else tuple(qubits)
    amps = np.asarray(amps, dtype=complex)
    if amps.shape != (2 ** len(qubits),):
        raise DomainError(f"expected {2 ** len(qubits)} amplitudes, got shape {amps.shape}")
    if normalized and abs(np.linalg.norm(amps) - 1) > NORM_TOL:
        raise ValidationError("amplitude vector is not normalized")
    return StateSignal(kernels.synthesize(amps, _basis(cfg, qubits)), cfg, qubits)


def inner_product(a: StateSignal, b: StateSignal) -> complex:
    """Sample-mean approximation of ``(1/T) int conj(a) b dt``."""
    if a.config != b.config:
        raise DomainError("signals have different configurations")
    return complex(np.mean(a.samples.conj() * b.samples))


def decompose(sig: StateSignal) -> np.ndarray:
    """Amplitudes ``<phi_x|sig>`` over the carriers the signal spans."""
    return kernels.decompose(sig.samples, _basis(sig.config, sig.qubits))


def _qubit_position(sig: StateSignal, qubit: int) -> int:
    if qubit not in sig.qubits:
        raise DomainError(f"qubit {qubit} is not part of this signal (spans {sig.qubits})")
    return sig.qubits.index(qubit)


def partial_project(sig: StateSignal, qubit: int):
    """Split ``sig`` into the partial projections with ``qubit`` at 0 and 1.

    The two returned signals span the remaining carriers. Implemented as an
    amplitude-domain split by the qubit's bit followed by resynthesis,
    which is equivalent to demodulating by each carrier of ``qubit`` and
    filtering.
    """
    pos = _qubit_position(sig, qubit)
    amps = decompose(sig)
    idx = np.arange(amps.size)
    bit = (idx >> pos) & 1
    rest = sig.qubits[:pos] + sig.qubits[pos + 1 :]
    B = _basis(sig.config, rest)
    out = []
    for b in (0, 1):
        part = amps[bit == b]
        out.append(StateSignal(kernels.synthesize(part, B), sig.config, rest))
    return out[0], out[1]


def reassemble(psi0: StateSignal, psi1: StateSignal, qubit: int) -> StateSignal:
    """Inverse of :func:`partial_project`: remodulate and sum the branches."""
    if psi0.config != psi1.config or psi0.qubits != psi1.qubits:
        raise DomainError("partial projections do not match")
    cfg = psi0.config
    qubits = tuple(sorted(psi0.qubits + (qubit,)))
    samples = _carrier(cfg, qubit, 0) * psi0.samples + _carrier(cfg, qubit, 1) * psi1.samples
    return StateSignal(samples, cfg, qubits)


# -- noise draws ---------------------------------------------------------------


def _require_rng(rng):
    if rng is None:
        raise DomainError("a numpy Generator is required for stochastic operations")
    return rng


def _draw_gains(noise: NoiseModel, rng) -> Optional[np.ndarray]:
    """Multiplicative gains (1+e_amp) exp(i e_phase) for the four branches."""
    if not (noise.gate_amplitude_error_sigma or noise.gate_phase_error_sigma):
        return None
    rng = _require_rng(rng)
    g = np.ones(4, dtype=complex)
    if noise.gate_amplitude_error_sigma:
        g = g * (1.0 + rng.normal(0.0, noise.gate_amplitude_error_sigma, 4))
    if noise.gate_phase_error_sigma:
        g = g * np.exp(1j * rng.normal(0.0, noise.gate_phase_error_sigma, 4))
    return g.reshape(2, 2)


def _complex_normal(rng, sigma, shape):
    # (re, im) pairs viewed as complex128 in place; same values as z[...,0] + 1j*z[...,1]
    z = rng.standard_normal(tuple(shape) + (2,))
    z *= sigma
    return z.view(np.complex128)[..., 0]


def add_noise(sig: StateSignal, noise: NoiseModel, rng=None) -> StateSignal:
    """Add white complex Gaussian noise with std ``awgn_sigma`` per quadrature."""
    if not noise.awgn_sigma:
        return sig.copy()
    rng = _require_rng(rng)
    return StateSignal(
        sig.samples + _complex_normal(rng, noise.awgn_sigma, sig.samples.shape), sig.config, sig.qubits
    )


# -- gates ------------------------------------------------------------------------


def _mix(psi0, psi1, G, qubit):
    cfg = psi0.config
    top = G[0, 0] * psi0.samples + G[0, 1] * psi1.samples
    bottom = G[1, 0] * psi0.samples + G[1, 1] * psi1.samples
    samples = _carrier(cfg, qubit, 0) * top + _carrier(cfg, qubit, 1) * bottom
    return StateSignal(samples, cfg, tuple(sorted(psi0.qubits + (qubit,))))


def _level(psi0, psi1) -> float:
    return float(np.sqrt(rms(psi0) ** 2 + rms(psi1) ** 2))


def _gate_gains(U, noise, rng):
    g = _draw_gains(noise, rng)
    return U if g is None else U * g


def _finish(sig, level, noise, rng):
    if not noise.awgn_sigma:
        return sig
    rng = _require_rng(rng)
    noisy = sig.samples + level * _complex_normal(rng, noise.awgn_sigma, sig.samples.shape)
    return StateSignal(noisy, sig.config, sig.qubits)


def apply_1q_gate(sig: StateSignal, U, qubit: int, noise: NoiseModel = NOISELESS, rng=None) -> StateSignal:
    """Apply a single-qubit gate through partial projection and remodulation.

    The four branch gains are ``U_ab`` times the noise model's gain
    errors; white noise scaled by the input level is added at the output.
    Random draws happen in the order: 4 amplitude errors, 4 phase errors,
    then the per-sample noise, each only when its sigma is non-zero.
    """
    U = check_unitary(U)
    _qubit_position(sig, qubit)
    psi0, psi1 = partial_project(sig, qubit)
    level = _level(psi0, psi1)
    G = _gate_gains(U, noise, rng)
    return _finish(_mix(psi0, psi1, G, qubit), level, noise, rng)


def apply_controlled_gate(sig: StateSignal, U, noise: NoiseModel = NOISELESS, rng=None) -> StateSignal:
    """Controlled-U with qubit 0 as control and qubit 1 as target."""
    U = check_unitary(U)
    if sig.config.qubit_count != 2 or sig.qubits != (0, 1):
        raise UnsupportedConfigurationError("controlled gates need a full two-qubit register")
    c0, c1 = partial_project(sig, 0)
    level = _level(c0, c1)
    G = _gate_gains(U, noise, rng)
    t0, t1 = partial_project(c1, 1)
    c1_out = _mix(t0, t1, G, 1)
    out = reassemble(c0, c1_out, 0)
    return _finish(out, level, noise, rng)


def apply_gate(sig: StateSignal, gate: Gate, noise: NoiseModel = NOISELESS, rng=None) -> StateSignal:
    if gate.controlled:
        if gate.qubit != 1:
            raise UnsupportedConfigurationError("controlled gates target qubit 1")
        return apply_controlled_gate(sig, gate.matrix, noise, rng)
    return apply_1q_gate(sig, gate.matrix, gate.qubit, noise, rng)


# -- measurement ---------------------------------------------------------------


def rms(sig: StateSignal, noise: NoiseModel = NOISELESS, rng=None) -> float:
    """Root-mean-square level, with a relative meter error when configured."""
    val = float(np.sqrt(np.mean(sig.samples.real**2 + sig.samples.imag**2)))
    if noise.rms_meter_error_sigma:
        val *= 1.0 + _require_rng(rng).normal(0.0, noise.rms_meter_error_sigma)
    return val


def outcome_probability(sig: StateSignal, qubit: int) -> float:
    """Noiseless probability of reading 0 on ``qubit``."""
    psi0, psi1 = partial_project(sig, qubit)
    v0, v1 = rms(psi0), rms(psi1)
    tot = v0 * v0 + v1 * v1
    if tot <= 0.0:
        raise DegenerateStateError("cannot measure a zero-norm signal")
    return v0 * v0 / tot


def measure_qubit(sig: StateSignal, qubit: int, noise: NoiseModel = NOISELESS, rng=None):
    """Measure one qubit; return ``(outcome, collapsed_signal)``.

    Reads the RMS levels ``v0, v1`` of the two partial projections, sets
    ``p = v0**2 / (v0**2 + v1**2)``, draws the hidden variable ``u`` from
    (0, 1] and reports 0 iff ``u <= p``. The surviving projection is
    remodulated onto the measured qubit's carrier and rescaled to unit RMS.
    """
    rng = _require_rng(rng)
    psi0, psi1 = partial_project(sig, qubit)
    v0 = rms(psi0, noise, rng)
    v1 = rms(psi1, noise, rng)
    tot = v0 * v0 + v1 * v1
    if not tot > 0.0:
        raise DegenerateStateError("cannot measure a zero-norm signal")
    p = v0 * v0 / tot
    u = 1.0 - rng.random()
    outcome = 0 if u <= p else 1
    branch = psi0 if outcome == 0 else psi1
    level = rms(branch)
    if level <= 0.0:
        raise DegenerateStateError("selected branch has zero norm")
    samples = _carrier(sig.config, qubit, outcome) * branch.samples / level
    return outcome, StateSignal(samples, sig.config, tuple(sorted(branch.qubits + (qubit,))))


# -- batched Monte Carlo ---------------------------------------------------------


def substreams(rng, count: int):
    """``count`` independent child generators of ``rng`` (SeedSequence spawn)."""
    return rng.spawn(int(count))


def _ops_arrays(gates: Sequence[Gate], cfg: SignalConfig):
    n = cfg.qubit_count
    qubit = np.empty(len(gates), dtype=np.intc)
    ctrl = np.empty(len(gates), dtype=np.intc)
    mats = np.empty((len(gates), 2, 2), dtype=complex)
    for i, g in enumerate(gates):
        if not 0 <= g.qubit < n:
            raise DomainError(f"gate {i} addresses qubit {g.qubit} on a {n}-qubit register")
        if g.controlled and (n != 2 or g.qubit != 1):
            raise UnsupportedConfigurationError("controlled gates need two qubits: control 0, target 1")
        qubit[i] = g.qubit
        ctrl[i] = 0 if g.controlled else -1
        mats[i] = g.matrix
    return qubit, ctrl, mats


def _draw_gate_noise(rng, noise: NoiseModel, shape, S, D=None):
    gains = None
    if noise.gate_amplitude_error_sigma or noise.gate_phase_error_sigma:
        gains = np.ones(tuple(shape) + (4,), dtype=complex)
        if noise.gate_amplitude_error_sigma:
            gains *= 1.0 + rng.normal(0.0, noise.gate_amplitude_error_sigma, gains.shape)
        if noise.gate_phase_error_sigma:
            gains *= np.exp(1j * rng.normal(0.0, noise.gate_phase_error_sigma, gains.shape))
    awgn = None
    if noise.awgn_sigma:
        if D is None:
            awgn = _complex_normal(rng, noise.awgn_sigma, tuple(shape) + (S,))
        else:
            # projection of white noise onto D orthonormal carriers
            awgn = _complex_normal(rng, noise.awgn_sigma / np.sqrt(S), tuple(shape) + (D,))
    return gains, awgn


def _initial_samples(init, cfg):
    if init is None:
        return _basis(cfg, tuple(range(cfg.qubit_count)))[:, 0]
    if isinstance(init, StateSignal):
        if init.config != cfg or init.qubits != tuple(range(cfg.qubit_count)):
            raise DomainError("initial signal does not match the register")
        return init.samples
    return synthesize(init, cfg).samples


def run_shots(
    cfg: SignalConfig,
    gates: Sequence[Gate],
    noise: NoiseModel,
    shots: int,
    rng,
    measure: Sequence[int],
    *,
    exact: bool = False,
    probe: Sequence[Gate] = (),
    checkpoints: Optional[Sequence[int]] = None,
    init=None,
    full_band: bool = False,
) -> np.ndarray:
    """Run repeated trials of a circuit and tally measurement outcomes.

    Each trial starts from ``init`` (``|0...0>`` by default), applies the
    ``gates``; at every checkpoint (number of gates applied so far) a copy
    of the signal gets the ``probe`` gates and is measured on ``measure``
    qubits in order. Checkpoints default to the end of the circuit.

    Returns an array ``(len(checkpoints), 2**len(measure))`` of outcome
    counts; bit ``j`` of the column index is the result for
    ``measure[j]``. With ``exact=True`` the hidden-variable draw is
    replaced by the outcome probabilities themselves, giving expected
    counts (averaged over gate-noise realizations when gates are noisy).

    Trials are processed in chunks of ``TRIAL_CHUNK``. Within a chunk the
    draws are, in order and only for non-zero sigmas: circuit gain
    amplitude errors, gain phase errors, circuit noise samples, then the
    same three for the probe, then meter errors and finally the hidden
    variables. Noiseless gates are simulated once and shared by all trials.

    Gate noise is drawn in the band of the basis signals: each gate gets
    ``2**n`` complex normals with per-quadrature std ``awgn_sigma /
    sqrt(samples_per_period)``, the exact distribution of the white
    noise's projection onto the carriers. Every later gate and every
    measurement decomposes the signal first, so the out-of-band remainder
    never influences an outcome. ``full_band=True`` draws the per-sample
    noise instead (slower, same outcome distribution).
    """
    shots = int(shots)
    if shots < 1:
        raise DomainError("shots must be at least 1")
    gates = list(gates)
    probe = list(probe)
    checkpoints = [len(gates)] if checkpoints is None else [int(c) for c in checkpoints]
    if not checkpoints or any(b < a for a, b in zip(checkpoints, checkpoints[1:])):
        raise DomainError("checkpoints must be a non-empty non-decreasing sequence")
    if checkpoints[0] < 0 or checkpoints[-1] > len(gates):
        raise DomainError("checkpoint outside the circuit")
    measure = [int(q) for q in measure]
    if not measure or any(not 0 <= q < cfg.qubit_count for q in measure) or len(set(measure)) != len(measure):
        raise DomainError(f"invalid measured qubits {measure}")

    B = _basis(cfg, tuple(range(cfg.qubit_count)))
    S = cfg.samples_per_period
    init_s = np.ascontiguousarray(_initial_samples(init, cfg))
    q, c, m = _ops_arrays(gates, cfg)
    pq, pc, pm = _ops_arrays(probe, cfg)
    ck = np.asarray(checkpoints, dtype=np.intc)
    K, M = len(checkpoints), len(measure)
    bits = np.asarray(measure, dtype=np.intc)
    P, Q = len(gates), len(probe)

    counts = np.zeros((K, 1 << M))
    shared = None
    if not noise.gates_are_noisy:
        shared = kernels.evolve_batch(B, init_s, 1, q, c, m, None, None, pq, pc, pm, None, None, ck)
        if exact and not noise.rms_meter_error_sigma:
            probs = _measure(shared, bits, None, None)
            return probs[0] * shots

    done = 0
    while done < shots:
        T = min(TRIAL_CHUNK, shots - done)
        if shared is None:
            D = None if full_band else cfg.dimension
            gains, awgn = _draw_gate_noise(rng, noise, (T, P), S, D)
            pgains, pawgn = _draw_gate_noise(rng, noise, (T, K, Q), S, D)
            amps = kernels.evolve_batch(B, init_s, T, q, c, m, gains, awgn, pq, pc, pm, pgains, pawgn, ck)
        else:
            amps = np.broadcast_to(shared, (T,) + shared.shape[1:])
        meter = None
        if noise.rms_meter_error_sigma:
            meter = 1.0 + rng.normal(0.0, noise.rms_meter_error_sigma, (T, K, M, 2))
        u = None if exact else 1.0 - rng.random((T, K, M))
        counts += _measure(amps, bits, meter, u).sum(axis=0)
        done += T
    if exact:
        return counts
    return np.rint(counts).astype(np.int64)


def _measure(amps, bits, meter, u):
    try:
        return kernels.measure_batch(np.ascontiguousarray(amps), bits, meter, u)
    except kernels.KernelDegenerateState as exc:
        raise DegenerateStateError(str(exc)) from None


def final_amplitudes(cfg: SignalConfig, gates: Sequence[Gate], init=None) -> np.ndarray:
    """Noiseless amplitudes after running ``gates`` through the batch kernel."""
    B = _basis(cfg, tuple(range(cfg.qubit_count)))
    q, c, m = _ops_arrays(list(gates), cfg)
    empty = _ops_arrays([], cfg)
    init_s = np.ascontiguousarray(_initial_samples(init, cfg))
    ck = np.asarray([len(gates)], dtype=np.intc)
    return kernels.evolve_batch(B, init_s, 1, q, c, m, None, None, *empty, None, None, ck)[0, 0]
