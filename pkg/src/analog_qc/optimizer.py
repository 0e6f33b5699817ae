"""Deterministic local minimizer shared by the MLE and fitting routines.

The method is fixed: limited-memory BFGS with box bounds (scipy's
L-BFGS-B driver) fed by central finite-difference gradients. The
finite-difference step for coordinate ``i`` is ``1e-6 * max(1, |x_i|)``.
No randomness is involved, so identical inputs give bit-identical
results on the same platform.

Cholesky factors are packed into real parameter vectors by
:func:`pack_cholesky` / :func:`unpack_cholesky`: the ``d`` real diagonal
entries first, then the ``d(d-1)/2`` strictly-lower entries in row-major
order, each as a (real, imaginary) pair.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize as _sp_optimize

from .errors import DomainError

__all__ = [
    "ObjectiveSpec",
    "MinimizeOptions",
    "MinimizeResult",
    "minimize",
    "pack_cholesky",
    "unpack_cholesky",
    "cholesky_parameter_count",
]

FD_RELATIVE_STEP = 1e-6

CONVERGED = "converged"
MAX_EVALS = "max-evals"
STALLED = "stalled"


@dataclass
class ObjectiveSpec:
    """A scalar objective over a real parameter vector.

    Parameters
    ----------
    dimension : int
        Length of the parameter vector.
    evaluate : callable
        Maps a float array of shape ``(dimension,)`` to a float.
    bounds : sequence of (low, high), optional
        Per-coordinate box; ``None`` entries mean unbounded.
    """

    dimension: int
    evaluate: Callable[[np.ndarray], float]
    bounds: Optional[Sequence[tuple]] = None


@dataclass
class MinimizeOptions:
    max_evals: int = 200_000
    f_tol: float = 1e-10
    x_tol: float = 1e-9


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    status: str
    n_evals: int
    # best-so-far objective after each accepted iterate; non-increasing
    trace: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


class _BudgetExhausted(Exception):
    pass


class _CountingObjective:
    """Wraps the user objective: counts calls, tracks the best point."""

    def __init__(self, fn, max_evals):
        self.fn = fn
        self.max_evals = max_evals
        self.n_evals = 0
        self.best_f = np.inf
        self.best_x = None

    def __call__(self, x):
        if self.n_evals >= self.max_evals:
            raise _BudgetExhausted
        self.n_evals += 1
        f = float(self.fn(x))
        if not np.isfinite(f):
            # steer the line search away from non-finite regions
            return 1e300
        if f < self.best_f:
            self.best_f = f
            self.best_x = np.array(x, dtype=float, copy=True)
        return f


def _central_gradient(obj, x, lo, hi):
    g = np.empty_like(x)
    for i in range(x.size):
        h = FD_RELATIVE_STEP * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] = min(x[i] + h, hi[i])
        xm[i] = max(x[i] - h, lo[i])
        denom = xp[i] - xm[i]
        if denom == 0.0:
            g[i] = 0.0
            continue
        g[i] = (obj(xp) - obj(xm)) / denom
    return g


def minimize(spec: ObjectiveSpec, start, opts: Optional[MinimizeOptions] = None) -> MinimizeResult:
    """Locally minimize ``spec.evaluate`` starting from ``start``.

    Returns the best point seen, which is never worse than ``start``.
    ``status`` is ``"converged"`` when the relative objective reduction
    falls below ``f_tol`` or the projected gradient below ``x_tol``,
    ``"max-evals"`` when the evaluation budget ran out, and ``"stalled"``
    when the line search could make no further progress.

    Raises
    ------
    DomainError
        If the objective is not finite at ``start`` or ``start`` violates
        the bounds.
    """
    opts = opts or MinimizeOptions()
    if opts.max_evals <= 0 or opts.f_tol <= 0 or opts.x_tol <= 0:
        raise DomainError("optimizer options must be positive")
    x0 = np.asarray(start, dtype=float).ravel().copy()
    if x0.size != spec.dimension:
        raise DomainError(f"start has length {x0.size}, expected {spec.dimension}")

    if spec.bounds is None:
        lo = np.full(x0.size, -np.inf)
        hi = np.full(x0.size, np.inf)
        bounds = None
    else:
        lo = np.array([-np.inf if b[0] is None else b[0] for b in spec.bounds], dtype=float)
        hi = np.array([np.inf if b[1] is None else b[1] for b in spec.bounds], dtype=float)
        if np.any(x0 < lo) or np.any(x0 > hi):
            raise DomainError("start lies outside the bounds")
        bounds = list(zip(lo, hi))

    f0 = float(spec.evaluate(x0))
    if not np.isfinite(f0):
        raise DomainError("objective is not finite at the start point")

    obj = _CountingObjective(spec.evaluate, opts.max_evals)
    obj.n_evals = 1
    obj.best_f = f0
    obj.best_x = x0.copy()
    trace = [f0]

    def fun_and_grad(x):
        f = obj(x)
        return f, _central_gradient(obj, x, lo, hi)

    def record(xk, *args):
        trace.append(obj.best_f)

    status = STALLED
    try:
        res = _sp_optimize.minimize(
            fun_and_grad,
            x0,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            callback=record,
            options={
                "ftol": opts.f_tol,
                "gtol": opts.x_tol,
                "maxiter": opts.max_evals,
                "maxfun": opts.max_evals,
                "maxcor": 20,
            },
        )
        if res.success:
            status = CONVERGED
        elif res.status == 1:
            status = MAX_EVALS
    except _BudgetExhausted:
        status = MAX_EVALS

    if trace[-1] != obj.best_f:
        trace.append(obj.best_f)
    return MinimizeResult(
        x=obj.best_x,
        fun=obj.best_f,
        status=status,
        n_evals=obj.n_evals,
        trace=trace,
    )


def cholesky_parameter_count(d: int) -> int:
    return d * d


def pack_cholesky(delta) -> np.ndarray:
    """Pack a lower-triangular ``d x d`` matrix into ``d*d`` reals."""
    delta = np.asarray(delta)
    d = delta.shape[0]
    out = np.empty(d * d)
    out[:d] = np.real(np.diag(delta))
    k = d
    for i in range(1, d):
        for j in range(i):
            out[k] = delta[i, j].real
            out[k + 1] = delta[i, j].imag
            k += 2
    return out


@functools.lru_cache(maxsize=None)
def _tril(d):
    return np.tril_indices(d, -1), np.diag_indices(d)


def unpack_cholesky(params, d: int) -> np.ndarray:
    """Inverse of :func:`pack_cholesky`."""
    params = np.asarray(params, dtype=float)
    if params.size != d * d:
        raise DomainError(f"expected {d * d} parameters for a {d}x{d} factor, got {params.size}")
    delta = np.zeros((d, d), dtype=complex)
    (rows, cols), diag = _tril(d)
    delta[diag] = params[:d]
    # tril_indices enumerates row-major, matching pack_cholesky
    delta[rows, cols] = params[d::2] + 1j * params[d + 1 :: 2]
    return delta
