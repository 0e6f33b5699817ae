"""Gate programs and end-to-end experiments driven by the CLI.

Deutsch's algorithm on the two-qubit register (qubit 0 is the query bit,
qubit 1 the answer bit):

* preparation: X on qubit 1, then H on qubit 0 and H on qubit 1;
* oracle ``f = 0``: identity gate on qubit 1; ``f = 1``: X on qubit 1;
  ``f(x) = x``: controlled-X; ``f(x) = 1 - x``: X on qubit 1 then
  controlled-X;
* H on qubit 0 and a measurement of qubit 0; outcome 0 means "constant".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from . import channels as ch
from . import quantum_math as qm
from . import tomography as tm
from .signal_engine import Gate, NoiseModel, SignalConfig, run_shots, substreams

__all__ = [
    "state_program",
    "deutsch_program",
    "ORACLES",
    "DeutschResult",
    "run_deutsch",
    "binomial_interval",
    "iterate_counts",
    "IterateResult",
    "run_iterate",
]

ORACLES = ("constant-0", "constant-1", "identity", "negation")
_CONSTANT = (True, True, False, False)


def state_program(name: str):
    """``(n_qubits, gates, ideal_amplitudes)`` for a named test state."""
    s = 1 / np.sqrt(2)
    if name == "singlet":
        # (|01> - |10>)/sqrt(2) up to a global phase
        gates = [Gate(qm.X, 0), Gate(qm.H, 0), Gate(qm.X, 1, controlled=True), Gate(qm.X, 1)]
        return 2, gates, np.array([0, s, -s, 0], dtype=complex)
    if name == "bell":
        gates = [Gate(qm.H, 0), Gate(qm.X, 1, controlled=True)]
        return 2, gates, np.array([s, 0, 0, s], dtype=complex)
    if name == "zero":
        return 1, [Gate(qm.I2, 0)], np.array([1, 0], dtype=complex)
    if name == "plus":
        return 1, [Gate(qm.H, 0)], np.array([s, s], dtype=complex)
    raise ValueError(f"unknown state {name!r}")


def deutsch_program(oracle: int):
    prep = [Gate(qm.X, 1), Gate(qm.H, 0), Gate(qm.H, 1)]
    body = {
        0: [Gate(qm.I2, 1)],
        1: [Gate(qm.X, 1)],
        2: [Gate(qm.X, 1, controlled=True)],
        3: [Gate(qm.X, 1), Gate(qm.X, 1, controlled=True)],
    }[oracle]
    return prep + body + [Gate(qm.H, 0)]


def binomial_interval(successes: float, trials: int, level: float = 0.95):
    """Wilson score interval for a success proportion."""
    k = int(round(successes))
    ci = stats.binomtest(k, int(trials)).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class DeutschResult:
    trials: int
    successes: np.ndarray  # per oracle; expected values in exact mode
    exact: bool

    @property
    def rates(self) -> np.ndarray:
        return self.successes / self.trials

    @property
    def aggregate(self) -> float:
        return float(self.successes.sum() / (4 * self.trials))


def run_deutsch(noise: NoiseModel, trials: int, rng, exact: bool = False, cfg=None) -> DeutschResult:
    """Success counts of Deutsch's algorithm for the four one-bit oracles.

    Each oracle runs ``trials`` times on its own sub-stream.
    """
    cfg = cfg or SignalConfig(2)
    streams = substreams(rng, 4)
    succ = np.empty(4)
    for f in range(4):
        counts = run_shots(cfg, deutsch_program(f), noise, trials, streams[f], [0], exact=exact)[0]
        succ[f] = counts[0] if _CONSTANT[f] else counts[1]
    return DeutschResult(int(trials), succ, exact)


def iterate_counts(gate, iterations: int, noise: NoiseModel, shots: int, rng, exact: bool = False, cfg=None):
    """Process-tomography counts after ``1..iterations`` applications of ``gate``.

    Every trial runs one noise trajectory through all iterations; at each
    iteration count a copy of the signal is projected and measured, so the
    tables for different ``n`` share trajectories (they are correlated
    across ``n`` but each is an unbiased tomography record). Returns an
    array ``(iterations, 4, 4)`` of success counts.
    """
    cfg = cfg or SignalConfig(1)
    streams = substreams(rng, 16)
    out = np.empty((int(iterations), 4, 4))
    body = [Gate(gate)] * int(iterations)
    checkpoints = list(range(2, int(iterations) + 2))
    for a in range(4):
        for b in range(4):
            c = run_shots(
                cfg,
                [Gate(tm.QPT_PREP_GATES[a])] + body,
                noise,
                shots,
                streams[4 * a + b],
                [0],
                exact=exact,
                probe=[Gate(tm.QPT_PREP_GATES[b].conj().T)],
                checkpoints=checkpoints,
            )
            out[:, a, b] = c[:, 0]
    return out


@dataclass
class IterateResult:
    chi_hats: list
    gate_series: ch.IterationSeries
    process_series: ch.IterationSeries
    counts: np.ndarray


def run_iterate(gate, iterations: int, noise: NoiseModel, shots: int, rng, exact: bool = False) -> IterateResult:
    """Full QPT after every iteration count, with both fidelity kinds."""
    U = qm.check_unitary(gate)
    counts = iterate_counts(U, iterations, noise, shots, rng, exact)
    ns = np.arange(1, int(iterations) + 1)
    chis, fg, fp = [], [], []
    for k, n in enumerate(ns):
        chi = tm.qpt_mle(tm.CountsTable(counts[k], shots))
        Un = np.linalg.matrix_power(U, int(n))
        chis.append(chi)
        fg.append(min(1.0, max(0.0, qm.gate_fidelity(chi, Un))))
        fp.append(min(1.0, max(0.0, qm.process_fidelity(chi, Un))))
    return IterateResult(
        chis,
        ch.IterationSeries(ns, fg, ch.GATE, chis),
        ch.IterationSeries(ns, fp, ch.PROCESS, chis),
        counts,
    )
