#!/usr/bin/env python3
"""Compare the compiled and numpy signal kernels.

Times ``evolve_batch`` directly on identical inputs (checking that both
backends agree), with gate noise given either in the carrier band (the
default of ``run_shots``) or per sample, then end-to-end ``run_shots``
workloads with each backend swapped in. Prints a table of median wall times and speedups.

Usage::

    python benchmarks/bench_kernels.py [--repeat N] [--json PATH]
"""

from __future__ import annotations

import argparse
import json
import statistics
import time
from contextlib import contextmanager

import numpy as np

from analog_qc import _pykernels, kernels
from analog_qc import quantum_math as qm
from analog_qc.signal_engine import Gate, NoiseModel, SignalConfig, _basis, _ops_arrays, run_shots

try:
    from analog_qc import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

NOISE = NoiseModel(awgn_sigma=0.5, gate_amplitude_error_sigma=0.01, gate_phase_error_sigma=0.01)


@contextmanager
def backend(mod):
    saved = {k: getattr(kernels, k) for k in ("decompose", "synthesize", "evolve_batch", "measure_batch")}
    try:
        for k in saved:
            setattr(kernels, k, getattr(mod, k))
        yield
    finally:
        for k, v in saved.items():
            setattr(kernels, k, v)


def timeit(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def random_program(n, depth, rng):
    gates = []
    for _ in range(depth):
        if n == 2 and rng.random() < 0.3:
            gates.append(Gate(qm.haar_unitary(rng), 1, controlled=True))
        else:
            gates.append(Gate(qm.haar_unitary(rng), int(rng.integers(n))))
    return gates


def kernel_case(n, depth, trials, rng, in_band):
    cfg = SignalConfig(n)
    gates = random_program(n, depth, rng)
    B = _basis(cfg, tuple(range(n)))
    q, c, m = _ops_arrays(gates, cfg)
    init = B[:, 0].copy()
    D, S = cfg.dimension, cfg.samples_per_period
    width = D if in_band else S
    awgn = 0.01 * (rng.standard_normal((trials, depth, width)) + 1j * rng.standard_normal((trials, depth, width)))
    empty_q = np.zeros(0, dtype=np.intc)
    empty_m = np.zeros((0, 2, 2), dtype=complex)
    ck = np.array([depth], dtype=np.intc)
    args = (B, init, trials, q, c, m, None, awgn, empty_q, empty_q, empty_m, None, None, ck)
    band = "in-band" if in_band else "full-band"
    return f"evolve_batch n={n} depth={depth} trials={trials}, {band} noise", args


def workloads():
    cfg1, cfg2 = SignalConfig(1), SignalConfig(2)
    rng = np.random.default_rng(7)
    prog2 = random_program(2, 20, rng)
    ident = [Gate(qm.H)] + [Gate(qm.I2)] * 90
    return [
        (
            "run_shots 1q, 90 identities + 90 probes, 2000 trials",
            lambda: run_shots(cfg1, ident, NOISE, 2000, np.random.default_rng(0), [0],
                              probe=[Gate(qm.H)], checkpoints=list(range(2, 92))),
        ),
        (
            "run_shots 2q, depth 20, 5000 trials",
            lambda: run_shots(cfg2, prog2, NOISE, 5000, np.random.default_rng(0), [0, 1]),
        ),
        (
            "run_shots 2q, depth 20, 500 trials, full-band noise",
            lambda: run_shots(cfg2, prog2, NOISE, 500, np.random.default_rng(0), [0, 1], full_band=True),
        ),
    ]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="benchmark kernel backends")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(2024)
    rows = []
    cases = [(n, d, t, band) for band in (True, False) for n, d, t in [(1, 20, 2000), (2, 20, 2000), (3, 20, 500)]]
    for n, depth, trials, in_band in cases:
        label, kargs = kernel_case(n, depth, trials, rng, in_band)
        outs, row = {}, {"case": label}
        for name, mod in BACKENDS.items():
            outs[name] = mod.evolve_batch(*kargs)
            row[name] = timeit(lambda: mod.evolve_batch(*kargs), args.repeat)
        if len(outs) == 2:
            row["max_abs_diff"] = float(np.max(np.abs(outs["python"] - outs["cython"])))
        rows.append(row)
    for label, fn in workloads():
        row = {"case": label}
        for name, mod in BACKENDS.items():
            with backend(mod):
                row[name] = timeit(fn, args.repeat)
        rows.append(row)

    width = max(len(r["case"]) for r in rows)
    head = f"{'case':<{width}}  " + "  ".join(f"{b:>9}" for b in BACKENDS)
    if len(BACKENDS) == 2:
        head += "  speedup"
    print(head)
    for r in rows:
        line = f"{r['case']:<{width}}  " + "  ".join(f"{r[b]:8.4f}s" for b in BACKENDS)
        if len(BACKENDS) == 2:
            line += f"  {r['python'] / r['cython']:6.1f}x"
        if "max_abs_diff" in r:
            line += f"  (max |diff| {r['max_abs_diff']:.1e})"
        print(line)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
