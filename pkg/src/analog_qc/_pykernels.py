"""Pure-numpy implementation of the signal-processing kernels.

This is the reference backend and the fallback used when the compiled
extension is unavailable. It vectorizes across trials with numpy; the
compiled backend works on fixed-size trial blocks in preallocated
buffers. Both accept exactly the same arguments and return the same
arrays up to floating-point summation order.

Array conventions (shared with ``_ckernels.pyx``)
-------------------------------------------------
basis   complex (S, D)      sampled basis signals, one column per amplitude
init    complex (S,)        starting signal
qubit   int32 (P,)          target bit of each gate
ctrl    int32 (P,)          control bit, or -1 for an uncontrolled gate
mats    complex (P, 2, 2)   ideal gate matrices
gains   complex (T, P, 4)   multiplicative branch gains, or None
awgn    complex (T, P, S)   additive noise per unit signal level, or None;
        or (T, P, D)        the same noise already projected onto the basis
checkpoints int32 (K,)      probe after this many prefix ops (non-decreasing)
"""

from __future__ import annotations

import numpy as np

NAME = "python"


class KernelDegenerateState(ArithmeticError):
    pass


def decompose(samples, basis):
    samples = np.asarray(samples, dtype=complex)
    return (samples @ basis.conj()) / basis.shape[0]


def synthesize(amps, basis):
    return np.asarray(amps, dtype=complex) @ basis.T


def _pair_indices(D, qubit, ctrl):
    x = np.arange(D)
    mask = (x >> qubit) & 1 == 0
    if ctrl >= 0:
        mask &= (x >> ctrl) & 1 == 1
    idx0 = x[mask]
    return idx0, idx0 | (1 << qubit)


def _apply_ops(s, basis, qubit, ctrl, mats, gains, awgn):
    """Run a list of gates on a (T, S) block of signals."""
    S, D = basis.shape
    conj_basis = basis.conj()
    for op in range(len(qubit)):
        A = (s @ conj_basis) / S
        level = np.sqrt(np.sum(A.real**2 + A.imag**2, axis=1))
        G = np.broadcast_to(mats[op], (A.shape[0], 2, 2))
        if gains is not None:
            G = G * gains[:, op].reshape(-1, 2, 2)
        idx0, idx1 = _pair_indices(D, int(qubit[op]), int(ctrl[op]))
        a0 = A[:, idx0]
        a1 = A[:, idx1]
        A[:, idx0] = G[:, 0, 0, None] * a0 + G[:, 0, 1, None] * a1
        A[:, idx1] = G[:, 1, 0, None] * a0 + G[:, 1, 1, None] * a1
        if awgn is not None and awgn.shape[-1] == D:
            A = A + level[:, None] * awgn[:, op]
            s = A @ basis.T
        else:
            s = A @ basis.T
            if awgn is not None:
                s = s + level[:, None] * awgn[:, op]
    return s


def evolve_batch(
    basis,
    init,
    n_trials,
    qubit,
    ctrl,
    mats,
    gains,
    awgn,
    probe_qubit,
    probe_ctrl,
    probe_mats,
    probe_gains,
    probe_awgn,
    checkpoints,
):
    """Evolve ``n_trials`` copies of ``init`` and return probe amplitudes.

    Returns complex (T, K, D): the decomposed signal after running the
    probe ops on a copy of the state at each checkpoint.
    """
    S, D = basis.shape
    T = int(n_trials)
    K = len(checkpoints)
    out = np.empty((T, K, D), dtype=complex)
    s = np.tile(np.asarray(init, dtype=complex), (T, 1))
    done = 0
    for k in range(K):
        target = int(checkpoints[k])
        if target > done:
            sl = slice(done, target)
            s = _apply_ops(
                s,
                basis,
                qubit[sl],
                ctrl[sl],
                mats[sl],
                None if gains is None else gains[:, sl],
                None if awgn is None else awgn[:, sl],
            )
            done = target
        sp = _apply_ops(
            s,
            basis,
            probe_qubit,
            probe_ctrl,
            probe_mats,
            None if probe_gains is None else probe_gains[:, k],
            None if probe_awgn is None else probe_awgn[:, k],
        )
        out[:, k] = (sp @ basis.conj()) / S
    return out


def measure_batch(amps, meas_bits, meter, uniforms):
    """Sequential computational-basis measurement of amplitude blocks.

    Parameters
    ----------
    amps : complex (T, K, D)
    meas_bits : int32 (M,)
        Bits measured, in order.
    meter : float (T, K, M, 2) or None
        Multiplicative errors on the two RMS readings of each measurement.
    uniforms : float (T, K, M) or None
        Hidden-variable draws in (0, 1]. ``None`` returns exact outcome
        probabilities instead of sampled one-hot outcomes.

    Returns
    -------
    float (T, K, 2**M); bit ``j`` of the last index is the outcome of
    ``meas_bits[j]``.
    """
    T, K, D = amps.shape
    M = len(meas_bits)
    x = np.arange(D)
    power = np.abs(amps) ** 2
    out = np.zeros((T, K, 1 << M))

    def branch_power(pw, bit):
        sel = ((x >> bit) & 1).astype(bool)
        return pw[..., ~sel].sum(axis=-1), pw[..., sel].sum(axis=-1), sel

    if uniforms is not None:
        pw = power.copy()
        index = np.zeros((T, K), dtype=np.int64)
        for j in range(M):
            v0, v1, sel = branch_power(pw, int(meas_bits[j]))
            if meter is not None:
                v0 = v0 * meter[:, :, j, 0] ** 2
                v1 = v1 * meter[:, :, j, 1] ** 2
            tot = v0 + v1
            if np.any(tot <= 0.0):
                raise KernelDegenerateState("zero-norm signal at measurement")
            p0 = v0 / tot
            one = uniforms[:, :, j] > p0
            index |= one.astype(np.int64) << j
            # collapse: keep only the branch that was observed
            keep = np.where(one[..., None], sel, ~sel)
            pw = np.where(keep, pw, 0.0)
        np.put_along_axis(out, index[..., None], 1.0, axis=-1)
        return out

    for leaf in range(1 << M):
        pw = power.copy()
        prob = np.ones((T, K))
        for j in range(M):
            b = (leaf >> j) & 1
            v0, v1, sel = branch_power(pw, int(meas_bits[j]))
            if meter is not None:
                v0 = v0 * meter[:, :, j, 0] ** 2
                v1 = v1 * meter[:, :, j, 1] ** 2
            tot = v0 + v1
            live = prob > 0
            if np.any(live & (tot <= 0.0)):
                raise KernelDegenerateState("zero-norm signal at measurement")
            with np.errstate(invalid="ignore", divide="ignore"):
                p0 = np.where(tot > 0, v0 / np.where(tot > 0, tot, 1.0), 0.0)
            prob = prob * (p0 if b == 0 else 1.0 - p0)
            keep = sel if b else ~sel
            pw = np.where(keep, pw, 0.0)
        out[:, :, leaf] = prob
    return out
