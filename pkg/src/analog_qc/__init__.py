"""Analog-signal emulation of a small gate-based quantum computer.

Qubit registers are represented by sampled sums of complex carriers;
gates and measurements act on those signals. On top of the emulator the
package provides state and process tomography, depolarizing-channel
models and fitting, and a command-line harness (``analog-qc``).
"""

__version__ = "0.1.0"

from .errors import (
    AnalogQCError,
    ConfigError,
    DegenerateStateError,
    DomainError,
    OptimizationError,
    SeriesParseError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .signal_engine import (
    NOISELESS,
    Gate,
    NoiseModel,
    SignalConfig,
    StateSignal,
    apply_1q_gate,
    apply_controlled_gate,
    apply_gate,
    basis_signal,
    decompose,
    inner_product,
    measure_qubit,
    partial_project,
    rms,
    run_shots,
    synthesize,
)
from .quantum_math import gate_fidelity, process_fidelity, state_fidelity
from .tomography import (
    CountsTable,
    PauliMeanTable,
    estimate_pauli_expectations,
    qpt_collect_counts,
    qpt_mle,
    qst_linear_inversion,
    qst_mle,
)
from .channels import (
    IterationSeries,
    cumulative_fidelity,
    depolarizing_chi,
    effective_p,
    fit_chi_to_series,
    fit_depolarizing,
    iterate_channel,
)
