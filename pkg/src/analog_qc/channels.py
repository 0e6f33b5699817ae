"""Depolarizing channels, iteration, and fidelity-series fitting.

The depolarizing channel is used in its Pauli-error form

    E(rho) = (1 - p) U rho U^dag + (p/3) sum_{s in X,Y,Z} s U rho U^dag s,

which contracts the Bloch vector by ``1 - 4p/3``. Under ``n`` iterations it
stays depolarizing with ``p_n = 3/4 [1 - (1 - 4p/3)**n]``; the cumulative
gate fidelity is ``sqrt(1 - 2 p_n / 3)`` and the process fidelity
``1 - p_n``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import optimize as _sp_optimize

from . import quantum_math as qm
from .errors import DomainError, OptimizationError, SeriesParseError, ValidationError
from .optimizer import MinimizeOptions, ObjectiveSpec, minimize, pack_cholesky, unpack_cholesky

__all__ = [
    "GATE",
    "PROCESS",
    "depolarizing_chi",
    "iterate_channel",
    "effective_p",
    "cumulative_fidelity",
    "process_fidelity_depolarizing",
    "depolarizing_curve",
    "IterationSeries",
    "DepolarizingFit",
    "fit_depolarizing",
    "iterated_fidelities",
    "ChiFit",
    "fit_chi_to_series",
    "rotation_chi",
]

GATE = "gate-fidelity"
PROCESS = "process-fidelity"
KINDS = (GATE, PROCESS)
_PREDICTOR_ALIASES = {"gate": GATE, GATE: GATE, "process": PROCESS, PROCESS: PROCESS}

FIT_XATOL = 1e-8
FIT_GRID = 2001


def _check_p(p):
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"depolarizing parameter must lie in [0, 1], got {p}")
    return p


def _check_n(n):
    n = np.asarray(n)
    if np.any(n < 0) or np.any(n != np.round(n)):
        raise DomainError("iteration counts must be non-negative integers")
    return n


def depolarizing_chi(p: float, U=qm.I2) -> np.ndarray:
    """Chi matrix of the depolarizing channel following the unitary ``U``."""
    p = _check_p(p)
    U = qm.check_unitary(U)
    kraus = [np.sqrt(1 - p) * U] + [np.sqrt(p / 3) * s @ U for s in qm.PAULIS[1:]]
    chi = qm.chi_from_kraus(kraus)
    return (chi + chi.conj().T) / 2


def rotation_chi(axis, angle: float, p: float = 0.0, U=qm.I2) -> np.ndarray:
    """Depolarizing channel after a small rotation ``exp(-i angle n.s/2)`` following ``U``.

    Useful for synthetic channels with a coherent over-rotation.
    """
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    gen = np.einsum("k,kab->ab", axis, qm.PAULIS[1:])
    V = np.cos(angle / 2) * qm.I2 - 1j * np.sin(angle / 2) * gen
    return depolarizing_chi(p, V @ qm.check_unitary(U))


def iterate_channel(chi, rho0, n: int) -> list:
    """States ``rho_k = E(rho_{k-1})`` for ``k = 1..n``.

    Raises
    ------
    ValidationError
        Naming the first iteration whose output is not a valid density
        matrix.
    """
    chi = qm.validate_chi(chi)
    rho = qm.validate_density_matrix(rho0)
    if int(n) < 1:
        raise DomainError("n must be at least 1")
    out = []
    for k in range(1, int(n) + 1):
        rho = qm.apply_chi_channel(chi, rho, check=False)
        try:
            qm.validate_density_matrix(rho)
        except ValidationError as exc:
            raise ValidationError(f"iteration {k}: {exc}") from None
        out.append(rho)
    return out


def effective_p(p: float, n):
    """Parameter of ``n`` composed depolarizing channels."""
    p = _check_p(p)
    n = _check_n(n)
    val = 0.75 * (1.0 - (1.0 - 4.0 * p / 3.0) ** n)
    return float(val) if np.ndim(val) == 0 else val


def cumulative_fidelity(p: float, n):
    """Gate fidelity after ``n`` depolarizing steps, ``sqrt(1 - [1 - (1-4p/3)**n]/2)``."""
    p = _check_p(p)
    n = _check_n(n)
    val = np.sqrt(1.0 - 0.5 * (1.0 - (1.0 - 4.0 * p / 3.0) ** n))
    return float(val) if np.ndim(val) == 0 else val


def process_fidelity_depolarizing(p: float, n):
    """Process fidelity ``1 - p_n`` after ``n`` depolarizing steps."""
    val = 1.0 - np.asarray(effective_p(p, n))
    return float(val) if np.ndim(val) == 0 else val


def depolarizing_curve(p: float, n, predictor: str):
    predictor = _predictor(predictor)
    if predictor == GATE:
        return np.asarray(cumulative_fidelity(p, n), dtype=float)
    return np.asarray(process_fidelity_depolarizing(p, n), dtype=float)


def _predictor(name):
    try:
        return _PREDICTOR_ALIASES[name]
    except KeyError:
        raise DomainError(f"unknown predictor {name!r}; use 'gate' or 'process'") from None


# -- series ------------------------------------------------------------------------


@dataclass
class IterationSeries:
    """Measured fidelity after ``n`` iterations, one kind per series.

    ``chi_hat`` optionally holds the tomographic estimate behind each
    point (``None`` where absent).
    """

    n: np.ndarray
    fidelity: np.ndarray
    kind: str = GATE
    chi_hat: Optional[list] = None

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=np.int64).ravel()
        self.fidelity = np.asarray(self.fidelity, dtype=float).ravel()
        self.kind = _predictor(self.kind)
        if self.n.shape != self.fidelity.shape:
            raise ValidationError("n and fidelity must have the same length")
        if self.n.size and (self.n[0] < 1 or np.any(np.diff(self.n) <= 0)):
            raise ValidationError("iteration indices must be >= 1 and strictly increasing")
        if np.any(~np.isfinite(self.fidelity)) or np.any((self.fidelity < 0) | (self.fidelity > 1)):
            raise ValidationError("fidelities must lie in [0, 1]")
        if self.chi_hat is not None:
            if len(self.chi_hat) != self.n.size:
                raise ValidationError("chi_hat must have one entry per record")
            self.chi_hat = [None if c is None else np.asarray(c, dtype=complex) for c in self.chi_hat]

    def __len__(self):
        return int(self.n.size)

    def head(self, count: int) -> "IterationSeries":
        chi = None if self.chi_hat is None else self.chi_hat[:count]
        return IterationSeries(self.n[:count], self.fidelity[:count], self.kind, chi)

    # CSV: header ``n,fidelity,kind``; one row per record
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "fidelity", "kind"])
        for n, f in zip(self.n, self.fidelity):
            w.writerow([int(n), repr(float(f)), self.kind])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, path=None) -> "IterationSeries":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise SeriesParseError("empty series file", path, 1)
        header = [h.strip() for h in rows[0]]
        if header[:2] != ["n", "fidelity"]:
            raise SeriesParseError("header must start with 'n,fidelity'", path, 1)
        has_kind = len(header) > 2 and header[2] == "kind"
        ns, fs, kinds = [], [], set()
        for lineno, row in enumerate(rows[1:], start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise SeriesParseError(f"expected at least 2 columns, got {len(row)}", path, lineno)
            try:
                n = int(row[0])
            except ValueError:
                raise SeriesParseError(f"bad iteration index {row[0]!r}", path, lineno) from None
            try:
                f = float(row[1])
            except ValueError:
                raise SeriesParseError(f"bad fidelity {row[1]!r}", path, lineno) from None
            if not (0.0 <= f <= 1.0):
                raise SeriesParseError(f"fidelity {f} outside [0, 1]", path, lineno)
            if ns and n <= ns[-1]:
                raise SeriesParseError("iteration indices must be strictly increasing", path, lineno)
            if n < 1:
                raise SeriesParseError("iteration index must be >= 1", path, lineno)
            if has_kind and len(row) > 2:
                k = row[2].strip()
                if k not in _PREDICTOR_ALIASES:
                    raise SeriesParseError(f"unknown kind {k!r}", path, lineno)
                kinds.add(_PREDICTOR_ALIASES[k])
            ns.append(n)
            fs.append(f)
        if len(kinds) > 1:
            raise SeriesParseError("a series must have a single kind", path)
        if not ns:
            raise SeriesParseError("series has no records", path)
        return cls(ns, fs, kinds.pop() if kinds else GATE)

    def to_dict(self) -> dict:
        recs = []
        for i, (n, f) in enumerate(zip(self.n, self.fidelity)):
            rec = {"n": int(n), "fidelity": float(f)}
            if self.chi_hat is not None and self.chi_hat[i] is not None:
                rec["chi_hat"] = _chi_to_json(self.chi_hat[i])
            recs.append(rec)
        return {"kind": self.kind, "records": recs}

    @classmethod
    def from_dict(cls, d, path=None) -> "IterationSeries":
        try:
            recs = d["records"]
            ns = [int(r["n"]) for r in recs]
            fs = [float(r["fidelity"]) for r in recs]
            chis = [_chi_from_json(r["chi_hat"]) if r.get("chi_hat") else None for r in recs]
            kind = d.get("kind", GATE)
        except (KeyError, TypeError, ValueError) as exc:
            raise SeriesParseError(f"malformed series JSON ({exc})", path) from None
        if not ns:
            raise SeriesParseError("series has no records", path)
        try:
            return cls(ns, fs, kind, chis if any(c is not None for c in chis) else None)
        except (ValidationError, DomainError) as exc:
            raise SeriesParseError(str(exc), path) from None

    @classmethod
    def load(cls, path) -> "IterationSeries":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise SeriesParseError(f"cannot read series ({exc.strerror})", path) from None
        if path.suffix.lower() == ".json":
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise SeriesParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
            return cls.from_dict(data, path)
        return cls.from_csv(text, path)


def _chi_to_json(chi):
    chi = np.asarray(chi, dtype=complex)
    return {"re": chi.real.tolist(), "im": chi.imag.tolist()}


def _chi_from_json(d):
    return np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)


# -- depolarizing fit --------------------------------------------------------------------


@dataclass
class DepolarizingFit:
    p: float
    rss: float
    predictor: str
    n_points: int


def fit_depolarizing(series: IterationSeries, predictor: Optional[str] = None) -> DepolarizingFit:
    """Least-squares depolarizing parameter for a fidelity series.

    A grid scan over [0, 1] picks the bracket, bounded Brent search
    (``xatol = 1e-8``) refines it. ``predictor`` defaults to the series
    kind: ``'gate'`` uses the cumulative gate fidelity, ``'process'`` uses
    ``1 - p_n``.
    """
    if len(series) == 0:
        raise DomainError("cannot fit an empty series")
    predictor = _predictor(predictor or series.kind)
    n = series.n.astype(float)
    y = series.fidelity

    def rss(p):
        r = depolarizing_curve(min(max(p, 0.0), 1.0), n, predictor) - y
        return float(r @ r)

    grid = np.linspace(0.0, 1.0, FIT_GRID)
    vals = np.array([rss(p) for p in grid])
    k = int(np.argmin(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, FIT_GRID - 1)]
    best_p, best = float(grid[k]), float(vals[k])
    res = _sp_optimize.minimize_scalar(
        rss, bounds=(lo, hi), method="bounded", options={"xatol": FIT_XATOL}
    )
    if res.fun <= best:
        best_p, best = float(res.x), float(res.fun)
    return DepolarizingFit(best_p, best, predictor, len(series))


# -- chi fit ---------------------------------------------------------------------------


def _ptm_powers(R, n_max):
    out = np.empty((n_max + 1, 4, 4))
    out[0] = np.eye(4)
    for k in range(1, n_max + 1):
        out[k] = R @ out[k - 1]
    return out


def sphere_quadratic_min(A, b, iters: int = 60):
    """Minimum of ``r.A.r + b.r`` over unit vectors ``r`` (batched).

    ``A`` is ``(..., 3, 3)`` symmetric, ``b`` is ``(..., 3)``. Solves the
    secular equation ``|r(mu)| = 1`` of the trust-region subproblem for
    the multiplier ``mu <= lambda_min`` by Newton steps on ``1/|r(mu)|``,
    safeguarded by bisection; the degenerate case (no root below
    ``lambda_min``) resolves to ``mu = lambda_min``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    lam, Q = np.linalg.eigh((A + np.swapaxes(A, -1, -2)) / 2)
    c = np.einsum("...ki,...k->...i", Q, b)
    c2 = c * c
    l0 = lam[..., 0]
    bn = np.sqrt(np.sum(c2, axis=-1))

    def secular(mu):
        d = lam - mu[..., None]
        with np.errstate(divide="ignore", invalid="ignore"):
            n2 = np.sum(np.where(c2 > 0, c2 / (4 * d * d), 0.0), axis=-1)
            dn2 = np.sum(np.where(c2 > 0, c2 / (2 * d * d * d), 0.0), axis=-1)
        return n2, dn2

    lo = l0 - bn / 2 - 1e-12
    hi = l0.copy()
    mu = lo.copy()
    for _ in range(iters):
        n2, dn2 = secular(mu)
        big = n2 > 1.0
        hi = np.where(big, mu, hi)
        lo = np.where(big, lo, mu)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = 1.0 / np.sqrt(n2) - 1.0
            dg = -0.5 * dn2 / (n2 * np.sqrt(n2))
            step = mu - g / dg
        ok = np.isfinite(step) & (step > lo) & (step < hi)
        new = np.where(ok, step, 0.5 * (lo + hi))
        if np.all(np.abs(new - mu) <= 1e-15 * (1.0 + np.abs(mu))):
            mu = new
            break
        mu = new
    d = lam - mu[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        # components of the minimizer; |r_i| <= 1 also bounds roundoff when d ~ 0
        r = np.where(c2 > 0, np.clip(c / (2 * d), -1.0, 1.0), 0.0)
    return mu - 0.5 * np.sum(c * r, axis=-1)


def iterated_fidelities(chi, U, ns, kind: str) -> np.ndarray:
    """Fidelity of ``n`` applications of ``chi`` against ``U**n`` for each ``n``.

    ``kind`` selects the gate fidelity (worst case over pure inputs,
    solved exactly on the Bloch sphere) or the process fidelity.
    """
    kind = _predictor(kind)
    ns = np.asarray(ns, dtype=np.int64)
    R = qm.chi_to_ptm(chi)
    RU = qm.unitary_ptm(U)
    n_max = int(ns.max()) if ns.size else 0
    Rn = _ptm_powers(R, n_max)[ns]
    RUn = _ptm_powers(RU, n_max)[ns]
    return _fidelities_from_ptm(Rn, RUn, kind)


def _fidelities_from_ptm(Rn, RUn, kind):
    if kind == PROCESS:
        return np.einsum("nab,nab->n", RUn, Rn) / 4.0
    t = Rn[:, 1:, 0]
    M = Rn[:, 1:, 1:]
    V = RUn[:, 1:, 1:]
    Vt = np.swapaxes(V, -1, -2)
    A = Vt @ M
    b = np.einsum("nij,nj->ni", Vt, t)
    f2 = 0.5 * (1.0 + sphere_quadratic_min(A, b))
    return np.sqrt(np.clip(f2, 0.0, 1.0))


@dataclass
class ChiFit:
    chi: np.ndarray
    rss: float
    status: str
    predicted: np.ndarray
    n_evals: int
    starts: int = 0
    residuals: np.ndarray = field(default=None)


def _chi_of(x):
    delta = unpack_cholesky(x, 4)
    return qm.trace_preserving_normalize(delta @ delta.conj().T)


_CHI_TO_PTM = None


def _chi_to_ptm_map():
    global _CHI_TO_PTM
    if _CHI_TO_PTM is None:
        cols = []
        for k in range(16):
            e = np.zeros(16, dtype=complex)
            e[k] = 1.0
            out = np.empty((4, 4), dtype=complex)
            for l in range(4):
                o = qm.apply_chi_channel(e.reshape(4, 4), qm.PAULIS[l], check=False)
                out[:, l] = np.einsum("kab,ba->k", qm.PAULIS, o) / 2
            cols.append(out.ravel())
        _CHI_TO_PTM = np.array(cols).T
    return _CHI_TO_PTM


def fit_chi_to_series(
    series: IterationSeries,
    U=qm.I2,
    n_refine: int = 3,
    opts: Optional[MinimizeOptions] = None,
) -> ChiFit:
    """Chi matrix whose iterates best reproduce a fidelity series.

    Minimizes ``sum_n (F_pred(chi, n) - F_n)**2`` over trace-preserving
    Cholesky-parameterized chi, with ``F_pred`` of the same kind as the
    series. Because a small coherent rotation is a saddle of this
    objective, the search starts from a set of candidates (the first
    tomographic estimate if present, the best depolarizing channel, and
    depolarizing channels preceded by rotations over a grid of axes and
    angles); the ``n_refine`` best are refined locally.

    Raises
    ------
    OptimizationError
        When every refinement runs out of evaluations; carries the best
        chi found.
    """
    if len(series) == 0:
        raise DomainError("cannot fit an empty series")
    U = qm.check_unitary(U)
    kind = series.kind
    ns = series.n
    y = series.fidelity
    n_max = int(ns.max())
    RUn = _ptm_powers(qm.unitary_ptm(U), n_max)[ns]
    T = _chi_to_ptm_map()

    def predict(chi):
        R = np.real(T @ np.asarray(chi, dtype=complex).ravel()).reshape(4, 4)
        return _fidelities_from_ptm(_ptm_powers(R, n_max)[ns], RUn, kind)

    def rss_chi(chi):
        r = predict(chi) - y
        return float(r @ r)

    def objective(x):
        return rss_chi(_chi_of(x))

    p0 = fit_depolarizing(series).p
    candidates = [depolarizing_chi(p0, U)]
    if series.chi_hat is not None and series.chi_hat[0] is not None:
        c0 = qm.trace_preserving_normalize(qm.project_to_density_matrix(series.chi_hat[0]))
        candidates.append(c0)
    axes = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)]
    top = min(math.pi, 8 * math.pi / max(1, n_max))
    for angle in np.linspace(top / 40, top, 40):
        for ax in axes:
            for p in (p0 * 0.5, p0):
                candidates.append(rotation_chi(ax, angle, p, U))
    scored = sorted(((rss_chi(c), i) for i, c in enumerate(candidates)), key=lambda t: t[0])

    best = None
    total = 0
    for _, i in scored[: max(1, n_refine)]:
        start = _safe_cholesky(candidates[i])
        res = minimize(ObjectiveSpec(16, objective), pack_cholesky(start), opts or MinimizeOptions())
        total += res.n_evals
        if best is None or res.fun < best.fun:
            best = res
    chi = _chi_of(best.x)
    pred = predict(chi)
    if best.status == "max-evals":
        raise OptimizationError("chi fit ran out of evaluations", chi, best.fun, best)
    return ChiFit(chi, best.fun, best.status, pred, total, len(candidates), pred - y)


def _safe_cholesky(chi, ridge=1e-6):
    chi = (chi + chi.conj().T) / 2
    return np.linalg.cholesky(chi + ridge * np.eye(4))
