#!/usr/bin/env python3
"""Tune the ``calibrated`` noise preset.

Gain, phase and meter errors are held at small fixed values and the AWGN
level is solved (Brent root finding with common random numbers) so that the
aggregate Deutsch success rate equals the target. The identity-gate QPT
fidelity and the singlet QST fidelity obtained with the resulting model are
then measured and stored alongside it, together with their targets, so the
preset records how close it gets to each reference.

Usage::

    python scripts/calibrate_noise.py [--write] [--trials N] [--seed S]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np
from scipy import optimize

from analog_qc import experiments as ex
from analog_qc import quantum_math as qm
from analog_qc import tomography as tm
from analog_qc.signal_engine import Gate, NoiseModel, SignalConfig

DEUTSCH_TARGET = 0.96
QPT_TARGET = 0.9933
QST_TARGET = 0.9978
FIXED = {
    "gate_amplitude_error_sigma": 0.01,
    "gate_phase_error_sigma": 0.01,
    "rms_meter_error_sigma": 0.01,
}
PRESET = Path(__file__).resolve().parents[1] / "src" / "analog_qc" / "presets" / "calibrated.json"


def model(sigma: float) -> NoiseModel:
    return NoiseModel(awgn_sigma=float(sigma), **FIXED)


def deutsch_rate(sigma: float, trials: int, seed: int) -> float:
    res = ex.run_deutsch(model(sigma), trials, np.random.default_rng(seed), exact=True)
    return res.aggregate


def qpt_fidelity(noise: NoiseModel, shots: int, seed: int) -> float:
    counts = tm.qpt_collect_counts([Gate(qm.I2)], shots, noise, np.random.default_rng(seed), exact=True)
    return qm.gate_fidelity(tm.qpt_mle(counts), qm.I2)


def qst_fidelity(noise: NoiseModel, shots: int, seed: int) -> float:
    n, prep, psi = ex.state_program("singlet")
    table = tm.estimate_pauli_expectations(prep, SignalConfig(n), noise, shots, np.random.default_rng(seed), exact=True)
    return qm.state_fidelity(tm.qst_mle(table), psi)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=40000, help="Deutsch trials per oracle")
    ap.add_argument("--shots", type=int, default=20000, help="trials per tomography cell")
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--write", action="store_true", help="overwrite the shipped preset")
    args = ap.parse_args(argv)

    sigma = optimize.brentq(
        lambda s: deutsch_rate(s, args.trials, args.seed) - DEUTSCH_TARGET, 0.05, 2.0, xtol=1e-4
    )
    sigma = round(sigma, 4)
    noise = model(sigma)
    achieved = {
        "deutsch_aggregate": round(deutsch_rate(sigma, args.trials, args.seed + 1), 4),
        "qpt_identity_gate_fidelity": round(qpt_fidelity(noise, args.shots, args.seed + 2), 4),
        "qst_singlet_fidelity": round(qst_fidelity(noise, args.shots, args.seed + 3), 4),
    }
    doc = {
        "description": (
            "AWGN level solved for the Deutsch target with small fixed gain, phase and meter "
            "errors; generated by scripts/calibrate_noise.py"
        ),
        "noise": noise.to_dict(),
        "calibration": {
            "targets": {
                "deutsch_aggregate": DEUTSCH_TARGET,
                "qpt_identity_gate_fidelity": QPT_TARGET,
                "qst_singlet_fidelity": QST_TARGET,
            },
            "achieved": achieved,
            "seed": args.seed,
            "deutsch_trials_per_oracle": args.trials,
            "tomography_shots": args.shots,
        },
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    print(text, end="")
    if args.write:
        PRESET.write_text(text, encoding="utf-8")
        print(f"wrote {PRESET}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
