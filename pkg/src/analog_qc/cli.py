"""Command-line front end: ``analog-qc {qst,qpt,iterate,deutsch,fit}``.

Each command reads an optional JSON configuration, applies flag
overrides, runs the experiment and writes JSON and CSV files into the
output directory. Outputs carry a full echo of the resolved
configuration and contain no timestamps, so identical inputs give
byte-identical files.

Exit codes: 0 success, 2 configuration or input error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import channels as ch
from . import experiments as ex
from . import kernels
from . import quantum_math as qm
from . import tomography as tm
from .config import PRESETS, STATES, ExperimentConfig
from .errors import AnalogQCError, ConfigError
from .signal_engine import Gate, SignalConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

FORECAST_FACTOR = 2  # forecasts extend to this multiple of the measured range


# -- output helpers ------------------------------------------------------------------


def _matrix_json(M):
    M = np.asarray(M, dtype=complex)
    return {"re": M.real.tolist(), "im": M.imag.tolist()}


def _num(x):
    return None if x is None else float(x)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in row])
    return buf.getvalue()


def _write(outdir: Path, name: str, text: str):
    path = outdir / name
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot write output ({exc.strerror})") from None
    return path


def _envelope(command: str, cfg: ExperimentConfig) -> dict:
    return {
        "command": command,
        "config": cfg.to_dict(),
        "metadata": {"package_version": __version__, "kernel_backend": kernels.BACKEND},
    }


def _cityscape_rows(ideal, est):
    d = ideal.shape[0]
    for i in range(d):
        for j in range(d):
            yield [i, j, float(ideal[i, j].real), float(ideal[i, j].imag), float(est[i, j].real), float(est[i, j].imag)]


# -- commands ------------------------------------------------------------------------


def cmd_qst(cfg: ExperimentConfig) -> dict:
    n, prep, psi = ex.state_program(cfg.state)
    scfg = SignalConfig(n, cfg.base_frequency_hz)
    rng = np.random.default_rng(cfg.seed)
    table = tm.estimate_pauli_expectations(prep, scfg, cfg.noise, cfg.shots, rng, exact=cfg.exact)
    table.seed = cfg.seed
    table.noise = cfg.noise
    res = tm.qst_mle(table, full_output=True)
    ideal = np.outer(psi, psi.conj())
    fid = qm.state_fidelity(res.rho, psi)
    lin_eigs = np.linalg.eigvalsh(res.linear)
    out = _envelope("qst", cfg)
    out.update(
        {
            "state": cfg.state,
            "n_qubits": n,
            "pauli_means": table.to_dict(),
            "rho_hat": _matrix_json(res.rho),
            "rho_ideal": _matrix_json(ideal),
            "fidelity": fid,
            "linear_inversion_min_eigenvalue": float(lin_eigs[0]),
            "linear_inversion_is_psd": bool(lin_eigs[0] >= -qm.PSD_CLIP),
            "optimizer": {"status": res.status, "objective": float(res.objective), "n_evals": res.n_evals},
        }
    )
    outdir = Path(cfg.output_dir)
    _write(outdir, "qst_result.json", _dump_json(out))
    _write(
        outdir,
        "qst_cityscape.csv",
        _csv_text(["row", "col", "ideal_re", "ideal_im", "estimate_re", "estimate_im"], _cityscape_rows(ideal, res.rho)),
    )
    return out


def cmd_qpt(cfg: ExperimentConfig) -> dict:
    U = cfg.gate_matrix
    rng = np.random.default_rng(cfg.seed)
    counts = tm.qpt_collect_counts([Gate(U)], cfg.shots, cfg.noise, rng, exact=cfg.exact,
                                   cfg=SignalConfig(1, cfg.base_frequency_hz))
    counts.seed = cfg.seed
    res = tm.qpt_mle(counts, full_output=True)
    gf = qm.gate_fidelity(res.chi, U, full_output=True)
    ideal = qm.chi_from_unitary(U)
    out = _envelope("qpt", cfg)
    out.update(
        {
            "counts": counts.to_dict(),
            "chi_hat": _matrix_json(res.chi),
            "chi_ideal": _matrix_json(ideal),
            "gate_fidelity": gf.value,
            "gate_fidelity_worst_bloch_vector": [float(v) for v in gf.bloch_vector],
            "gate_fidelity_status": gf.status,
            "process_fidelity": qm.process_fidelity(res.chi, U),
            "tp_residual": res.tp_residual,
            "optimizer": {"status": res.status, "objective": float(res.objective), "n_evals": res.n_evals},
        }
    )
    labels = qm.PAULI_LABELS
    rows = (
        [i + 1, j + 1, labels[i], labels[j], float(res.chi[i, j].real), float(res.chi[i, j].imag)]
        for i in range(4)
        for j in range(4)
    )
    outdir = Path(cfg.output_dir)
    _write(outdir, "qpt_result.json", _dump_json(out))
    _write(outdir, "qpt_chi.csv", _csv_text(["i", "j", "pauli_i", "pauli_j", "re", "im"], rows))
    return out


def _fit_json(fit: ch.DepolarizingFit) -> dict:
    return {"p": fit.p, "rss": fit.rss, "predictor": fit.predictor, "n_points": fit.n_points}


def cmd_iterate(cfg: ExperimentConfig) -> dict:
    U = cfg.gate_matrix
    rng = np.random.default_rng(cfg.seed)
    res = ex.run_iterate(U, cfg.iterations, cfg.noise, cfg.shots, rng, exact=cfg.exact)
    series = {ch.GATE: res.gate_series, ch.PROCESS: res.process_series}
    fits = {}
    for kind, s in series.items():
        fits[kind] = {
            "single_point": _fit_json(ch.fit_depolarizing(s.head(1))),
            "full_series": _fit_json(ch.fit_depolarizing(s)),
        }
    n_fore = np.arange(1, FORECAST_FACTOR * cfg.iterations + 1)
    chi1 = res.chi_hats[0]
    curves = {}
    for kind in (ch.GATE, ch.PROCESS):
        short = "gate" if kind == ch.GATE else "process"
        curves[f"chi1_{short}"] = ch.iterated_fidelities(chi1, U, n_fore, kind)
        curves[f"depol_single_{short}"] = ch.depolarizing_curve(fits[kind]["single_point"]["p"], n_fore, kind)
        curves[f"depol_full_{short}"] = ch.depolarizing_curve(fits[kind]["full_series"]["p"], n_fore, kind)
    out = _envelope("iterate", cfg)
    out.update(
        {
            "iterations": cfg.iterations,
            "series": {kind: s.to_dict() for kind, s in series.items()},
            "depolarizing_fits": fits,
            "forecast": {"n": n_fore.tolist(), **{k: v.tolist() for k, v in curves.items()}},
        }
    )
    outdir = Path(cfg.output_dir)
    _write(outdir, "iterate_result.json", _dump_json(out))
    _write(outdir, "iterate_series_gate.csv", res.gate_series.to_csv())
    _write(outdir, "iterate_series_process.csv", res.process_series.to_csv())
    names = list(curves)
    rows = []
    for k, n in enumerate(n_fore):
        measured = [None, None]
        if n <= cfg.iterations:
            measured = [float(res.gate_series.fidelity[n - 1]), float(res.process_series.fidelity[n - 1])]
        rows.append([int(n)] + measured + [float(curves[c][k]) for c in names])
    _write(outdir, "iterate_forecast.csv", _csv_text(["n", "measured_gate", "measured_process"] + names, rows))
    return out


def cmd_deutsch(cfg: ExperimentConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    res = ex.run_deutsch(cfg.noise, cfg.shots, rng, exact=cfg.exact, cfg=SignalConfig(2, cfg.base_frequency_hz))
    per = []
    for f, name in enumerate(ex.ORACLES):
        lo, hi = ex.binomial_interval(res.successes[f], res.trials)
        per.append(
            {
                "oracle": name,
                "constant": f < 2,
                "trials": res.trials,
                "successes": float(res.successes[f]),
                "success_rate": float(res.rates[f]),
                "ci95": [lo, hi],
            }
        )
    lo, hi = ex.binomial_interval(res.successes.sum(), 4 * res.trials)
    out = _envelope("deutsch", cfg)
    out.update(
        {
            "exact": res.exact,
            "oracles": per,
            "aggregate": {"trials": 4 * res.trials, "success_rate": res.aggregate, "ci95": [lo, hi]},
        }
    )
    rows = [[p["oracle"], int(p["constant"]), p["trials"], p["successes"], p["success_rate"]] + p["ci95"] for p in per]
    rows.append(["aggregate", "", 4 * res.trials, float(res.successes.sum()), res.aggregate, lo, hi])
    outdir = Path(cfg.output_dir)
    _write(outdir, "deutsch_result.json", _dump_json(out))
    _write(outdir, "deutsch.csv", _csv_text(["oracle", "constant", "trials", "successes", "success_rate", "ci_low", "ci_high"], rows))
    return out


def cmd_fit(cfg: ExperimentConfig, series_path, predictor=None) -> dict:
    series = ch.IterationSeries.load(series_path)
    if predictor is not None and ch._predictor(predictor) != series.kind:
        series = ch.IterationSeries(series.n, series.fidelity, predictor, series.chi_hat)
    U = cfg.gate_matrix
    full = ch.fit_depolarizing(series)
    first = ch.fit_depolarizing(series.head(1))
    chi_fit = ch.fit_chi_to_series(series, U)
    n_fore = np.arange(1, FORECAST_FACTOR * int(series.n.max()) + 1)
    curves = {
        "depol_full": ch.depolarizing_curve(full.p, n_fore, series.kind),
        "depol_first_point": ch.depolarizing_curve(first.p, n_fore, series.kind),
        "chi_fit": ch.iterated_fidelities(chi_fit.chi, U, n_fore, series.kind),
    }
    out = _envelope("fit", cfg)
    out.update(
        {
            "series_file": str(series_path),
            "kind": series.kind,
            "n_points": len(series),
            "depolarizing_full_series": _fit_json(full),
            "depolarizing_first_point": _fit_json(first),
            "chi_fit": {
                "chi": _matrix_json(chi_fit.chi),
                "rss": chi_fit.rss,
                "status": chi_fit.status,
                "residuals": [float(r) for r in chi_fit.residuals],
                "process_fidelity_single_step": qm.process_fidelity(chi_fit.chi, U),
            },
            "forecast": {"n": n_fore.tolist(), **{k: v.tolist() for k, v in curves.items()}},
        }
    )
    measured = dict(zip(series.n.tolist(), series.fidelity.tolist()))
    rows = [[int(n), measured.get(int(n))] + [float(curves[c][k]) for c in curves] for k, n in enumerate(n_fore)]
    outdir = Path(cfg.output_dir)
    _write(outdir, "fit_result.json", _dump_json(out))
    _write(outdir, "fit_forecast.csv", _csv_text(["n", "measured"] + list(curves), rows))
    return out


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment configuration")
    common.add_argument("--seed", type=int, help="master seed (0 .. 2**64-1)")
    common.add_argument("--shots", type=int, help="trials per tomography cell or per oracle")
    common.add_argument("--iterations", type=int, help="number of gate iterations (iterate)")
    common.add_argument("--noise", metavar="PRESET|PATH", help=f"noise preset ({', '.join(PRESETS)}) or JSON file")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--exact", action="store_true", default=None,
                        help="use outcome probabilities instead of sampled outcomes")
    common.add_argument("--gate", help="gate name (I, X, Y, Z, H, S, SDG, T)")
    common.add_argument("--state", choices=STATES, help="state prepared for qst")

    parser = argparse.ArgumentParser(
        prog="analog-qc",
        description="Analog-signal quantum emulator: tomography, Deutsch's algorithm, channel fitting.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("qst", parents=[common], help="state tomography of a prepared state")
    sub.add_parser("qpt", parents=[common], help="process tomography of a single gate")
    sub.add_parser("iterate", parents=[common], help="process tomography after 1..N gate iterations")
    sub.add_parser("deutsch", parents=[common], help="success rate of Deutsch's algorithm")
    fit = sub.add_parser("fit", parents=[common], help="fit depolarizing and chi models to a fidelity series")
    fit.add_argument("series", metavar="SERIES", help="CSV (n,fidelity[,kind]) or JSON series file")
    fit.add_argument("--predictor", choices=("gate", "process"), help="fidelity form (default: series kind)")
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    return cfg.with_overrides(
        seed=args.seed,
        shots=args.shots,
        iterations=args.iterations,
        noise=args.noise,
        output_dir=args.out,
        exact=args.exact,
        gate=args.gate,
        state=args.state,
    )


def _summary(command, out) -> str:
    if command == "qst":
        return f"state fidelity {out['fidelity']:.6f}"
    if command == "qpt":
        return f"gate fidelity {out['gate_fidelity']:.6f}, process fidelity {out['process_fidelity']:.6f}"
    if command == "iterate":
        fits = out["depolarizing_fits"]
        return (
            f"depolarizing p (gate form): single point {fits[ch.GATE]['single_point']['p']:.5f}, "
            f"full series {fits[ch.GATE]['full_series']['p']:.5f}"
        )
    if command == "deutsch":
        return f"aggregate success rate {out['aggregate']['success_rate']:.4f}"
    return (
        f"depolarizing p: full series {out['depolarizing_full_series']['p']:.6f}, "
        f"first point {out['depolarizing_first_point']['p']:.6f}"
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "fit":
            out = cmd_fit(cfg, args.series, args.predictor)
        else:
            out = {"qst": cmd_qst, "qpt": cmd_qpt, "iterate": cmd_iterate, "deutsch": cmd_deutsch}[args.command](cfg)
    except ConfigError as exc:
        print(f"analog-qc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AnalogQCError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        print(f"analog-qc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"{args.command}: {_summary(args.command, out)}; outputs in {cfg.output_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
