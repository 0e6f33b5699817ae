"""Experiment configuration files and noise presets.

A configuration is a JSON object; every field is optional and missing
fields take the defaults of :class:`ExperimentConfig`. Noise may be given
as a preset name (``"none"``, ``"calibrated"``), a path to a JSON file with
:class:`~analog_qc.signal_engine.NoiseModel` fields, or an inline object.
Resolved configurations always store the explicit noise parameters, so
``from_dict(cfg.to_dict()) == cfg``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import quantum_math as qm
from .errors import ConfigError, ValidationError
from .signal_engine import NoiseModel

__all__ = [
    "ExperimentConfig",
    "PRESETS",
    "load_preset",
    "resolve_noise",
    "parse_gate",
    "STATES",
    "SCHEMAS",
    "load_schema",
]

SEED_MAX = 2**64 - 1
MAX_SHOTS = 10**8
MAX_ITERATIONS = 1000
PRESETS = ("none", "calibrated")
STATES = ("singlet", "bell", "zero", "plus")

_FIELDS = {
    "seed",
    "noise",
    "noise_preset",
    "shots",
    "iterations",
    "gate",
    "output_dir",
    "state",
    "exact",
    "base_frequency_hz",
}


SCHEMAS = (
    "noise_model",
    "experiment_config",
    "config_file",
    "pauli_means",
    "qpt_counts",
    "iteration_series",
    "qst_result",
    "qpt_result",
    "iterate_result",
    "deutsch_result",
    "fit_result",
)


def load_schema(name: str) -> dict:
    """Shipped JSON Schema (draft 2020-12) for a data file or command output."""
    if name not in SCHEMAS:
        raise KeyError(f"unknown schema {name!r}; choose from {', '.join(SCHEMAS)}")
    text = resources.files("analog_qc").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_preset(name: str) -> NoiseModel:
    if name not in PRESETS:
        raise ConfigError(f"unknown noise preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("analog_qc").joinpath("presets", f"{name}.json").read_text(encoding="utf-8")
    data = json.loads(text)
    return NoiseModel.from_dict(data["noise"])


def resolve_noise(spec) -> tuple:
    """``(NoiseModel, preset_name_or_None)`` from a preset, path or mapping."""
    if isinstance(spec, NoiseModel):
        return spec, None
    if isinstance(spec, dict):
        try:
            return NoiseModel.from_dict(spec), None
        except (ValidationError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid noise model: {exc}") from None
    if isinstance(spec, str):
        if spec in PRESETS:
            return load_preset(spec), spec
        path = Path(spec)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(
                f"noise {spec!r} is neither a preset ({', '.join(PRESETS)}) nor an existing file"
            ) from None
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: cannot read noise model ({exc})") from None
        if isinstance(data, dict) and "noise" in data and isinstance(data["noise"], dict):
            data = data["noise"]
        try:
            return NoiseModel.from_dict(data), None
        except (ValidationError, TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"{path}: invalid noise model ({exc})") from None
    raise ConfigError(f"cannot interpret noise setting {spec!r}")


def parse_gate(spec) -> np.ndarray:
    """Named gate (``I, X, Y, Z, H, S, SDG, T``) or a 2x2 matrix literal.

    Matrix literals are nested lists of real numbers or of ``[re, im]``
    pairs, or an object ``{"re": [[..]], "im": [[..]]}``.
    """
    if isinstance(spec, str):
        key = spec.upper()
        if key not in qm.NAMED_GATES:
            raise ConfigError(f"unknown gate {spec!r}; choose from {', '.join(qm.NAMED_GATES)}")
        return qm.NAMED_GATES[key]
    try:
        if isinstance(spec, dict):
            U = np.asarray(spec["re"], dtype=float) + 1j * np.asarray(spec.get("im", 0.0), dtype=float)
        else:
            arr = np.asarray(spec, dtype=float)
            U = arr[..., 0] + 1j * arr[..., 1] if arr.shape == (2, 2, 2) else arr.astype(complex)
        return qm.check_unitary(U)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid gate matrix: {exc}") from None


def _gate_to_json(spec):
    U = parse_gate(spec)
    if isinstance(spec, str):
        return spec.upper()
    return {"re": U.real.tolist(), "im": U.imag.tolist()}


@dataclass
class ExperimentConfig:
    """Everything a CLI command needs, with documented ranges.

    seed: 0 .. 2**64-1; shots: 1 .. 1e8 (trials per tomography cell or per
    Deutsch oracle); iterations: 1 .. 1000; gate: name or 2x2 unitary;
    state: one of ``singlet, bell, zero, plus``.
    """

    seed: int = 0
    noise: NoiseModel = field(default_factory=NoiseModel)
    noise_preset: Optional[str] = "none"
    shots: int = 2000
    iterations: int = 90
    gate: Union[str, dict] = "I"
    output_dir: str = "out"
    state: str = "singlet"
    exact: bool = False
    base_frequency_hz: float = 1000.0

    def __post_init__(self):
        self.validate()

    def validate(self):
        def need_int(name, lo, hi):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {v!r}")
            if not lo <= v <= hi:
                raise ConfigError(f"{name} must lie in [{lo}, {hi}], got {v}")
            setattr(self, name, int(v))

        need_int("seed", 0, SEED_MAX)
        need_int("shots", 1, MAX_SHOTS)
        need_int("iterations", 1, MAX_ITERATIONS)
        if not isinstance(self.noise, NoiseModel):
            raise ConfigError("noise must be a NoiseModel")
        if self.noise_preset is not None and self.noise_preset not in PRESETS:
            raise ConfigError(f"unknown noise preset {self.noise_preset!r}")
        self.gate = _gate_to_json(self.gate)
        if self.state not in STATES:
            raise ConfigError(f"unknown state {self.state!r}; choose from {', '.join(STATES)}")
        if not isinstance(self.exact, bool):
            raise ConfigError("exact must be true or false")
        if not isinstance(self.output_dir, str) or not self.output_dir:
            raise ConfigError("output_dir must be a non-empty path")
        try:
            f = float(self.base_frequency_hz)
        except (TypeError, ValueError):
            raise ConfigError("base_frequency_hz must be a number") from None
        if not (np.isfinite(f) and f > 0):
            raise ConfigError("base_frequency_hz must be positive")
        self.base_frequency_hz = f

    @property
    def gate_matrix(self) -> np.ndarray:
        return parse_gate(self.gate)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "noise": self.noise.to_dict(),
            "noise_preset": self.noise_preset,
            "shots": self.shots,
            "iterations": self.iterations,
            "gate": self.gate,
            "output_dir": self.output_dir,
            "state": self.state,
            "exact": self.exact,
            "base_frequency_hz": self.base_frequency_hz,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = set(d) - _FIELDS
        if unknown:
            raise ConfigError(f"unknown configuration fields: {', '.join(sorted(unknown))}")
        kw = dict(d)
        preset = kw.pop("noise_preset", None)
        if "noise" in kw:
            noise, named = resolve_noise(kw["noise"])
            kw["noise"] = noise
            kw["noise_preset"] = named or preset
        elif preset is not None:
            kw["noise"] = load_preset(preset)
            kw["noise_preset"] = preset
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read configuration ({exc.strerror})") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
        try:
            return cls.from_dict(data)
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "noise" in kw:
            noise, named = resolve_noise(kw["noise"])
            kw["noise"] = noise
            kw["noise_preset"] = named
        return replace(self, **kw)
