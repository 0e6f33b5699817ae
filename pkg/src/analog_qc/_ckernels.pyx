# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled signal-processing kernels.

Same signatures and array conventions as ``_pykernels``. ``evolve_batch``
runs the program on blocks of trials held in one preallocated buffer:
decomposition and resynthesis of a block are single BLAS ``zgemm`` calls,
and the gate, gain and noise updates are plain loops, so no temporaries
are created per gate.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport zgemm

cnp.import_array()

NAME = "cython"


from ._pykernels import KernelDegenerateState


DEF MAX_D = 8


cdef inline void _decompose(const double* br, const double* bi,
                            const double* sr, const double* si,
                            double complex* a,
                            Py_ssize_t S, Py_ssize_t D) noexcept nogil:
    # a[x] = mean_j conj(B[j, x]) * s[j]; br, bi are the transposed basis (D, S)
    cdef Py_ssize_t j, x
    cdef double accr, acci, inv = 1.0 / S
    cdef const double* rr
    cdef const double* ri
    for x in range(D):
        rr = br + x * S
        ri = bi + x * S
        accr = 0.0
        acci = 0.0
        for j in range(S):
            accr = accr + rr[j] * sr[j] + ri[j] * si[j]
            acci = acci + rr[j] * si[j] - ri[j] * sr[j]
        a[x].real = accr * inv
        a[x].imag = acci * inv


cdef inline void _synthesize(const double* br, const double* bi,
                             const double complex* a,
                             double* sr, double* si,
                             Py_ssize_t S, Py_ssize_t D) noexcept nogil:
    cdef Py_ssize_t j, x
    cdef double ar, ai
    cdef const double* rr
    cdef const double* ri
    for j in range(S):
        sr[j] = 0.0
        si[j] = 0.0
    for x in range(D):
        rr = br + x * S
        ri = bi + x * S
        ar = a[x].real
        ai = a[x].imag
        for j in range(S):
            sr[j] = sr[j] + rr[j] * ar - ri[j] * ai
            si[j] = si[j] + rr[j] * ai + ri[j] * ar


DEF BLOCK = 64


cdef inline void _decompose_block(const double complex* bconj, const double complex* sig,
                                  double complex* amps, int ldc,
                                  int S, int D, int nb) noexcept nogil:
    # amps[t, x] = mean_j sig[t, j] * conj(basis[j, x]); row-major (nb, D) with row stride ldc
    cdef char tn = b'N'
    cdef double complex alpha = 1.0 / S
    cdef double complex beta = 0.0
    zgemm(&tn, &tn, &D, &nb, &S, &alpha, <double complex*>bconj, &D, <double complex*>sig, &S,
          &beta, amps, &ldc)


cdef inline void _synthesize_block(const double complex* basis, const double complex* amps,
                                   double complex* sig, int S, int D, int nb) noexcept nogil:
    # sig[t, j] = sum_x amps[t, x] * basis[j, x]
    cdef char tt = b'T'
    cdef char tn = b'N'
    cdef double complex alpha = 1.0
    cdef double complex beta = 0.0
    zgemm(&tt, &tn, &S, &nb, &D, &alpha, <double complex*>basis, &D, <double complex*>amps, &D,
          &beta, sig, &S)


cdef void _apply_block(const double complex* basis, const double complex* bconj,
                       double complex* sig, double complex* amps, double* level,
                       int qubit, int ctrl, const double complex* mat,
                       const double complex* gain, Py_ssize_t gain_stride,
                       const double complex* noise, Py_ssize_t noise_stride, bint noise_in_band,
                       int S, int D, int nb) noexcept nogil:
    cdef Py_ssize_t t, x, j
    cdef double lv
    cdef double complex g00, g01, g10, g11, a0, a1
    cdef double complex* a
    cdef double complex* sg
    cdef const double complex* w
    cdef int bit = 1 << qubit
    _decompose_block(bconj, sig, amps, D, S, D, nb)
    for t in range(nb):
        a = amps + t * D
        lv = 0.0
        for x in range(D):
            lv += a[x].real * a[x].real + a[x].imag * a[x].imag
        level[t] = sqrt(lv)
        g00 = mat[0]
        g01 = mat[1]
        g10 = mat[2]
        g11 = mat[3]
        if gain != NULL:
            g00 = g00 * gain[t * gain_stride]
            g01 = g01 * gain[t * gain_stride + 1]
            g10 = g10 * gain[t * gain_stride + 2]
            g11 = g11 * gain[t * gain_stride + 3]
        for x in range(D):
            if x & bit:
                continue
            if ctrl >= 0 and not ((x >> ctrl) & 1):
                continue
            a0 = a[x]
            a1 = a[x | bit]
            a[x] = g00 * a0 + g01 * a1
            a[x | bit] = g10 * a0 + g11 * a1
        if noise != NULL and noise_in_band:
            w = noise + t * noise_stride
            for x in range(D):
                a[x] = a[x] + level[t] * w[x]
    _synthesize_block(basis, amps, sig, S, D, nb)
    if noise != NULL and not noise_in_band:
        for t in range(nb):
            sg = sig + t * S
            w = noise + t * noise_stride
            lv = level[t]
            for j in range(S):
                sg[j] = sg[j] + lv * w[j]


cdef tuple _split(basis):
    B = np.asarray(basis, dtype=complex)
    if B.ndim != 2 or B.shape[1] > MAX_D:
        raise ValueError(f"at most {MAX_D} amplitudes are supported")
    return np.ascontiguousarray(B.real.T), np.ascontiguousarray(B.imag.T)


def decompose(samples, basis):
    cdef const double[:, ::1] br
    cdef const double[:, ::1] bi
    br, bi = _split(basis)
    cdef Py_ssize_t D = br.shape[0], S = br.shape[1]
    x = np.asarray(samples, dtype=complex)
    if x.shape != (S,):
        raise ValueError("sample count does not match basis")
    cdef const double[::1] sr = np.ascontiguousarray(x.real)
    cdef const double[::1] si = np.ascontiguousarray(x.imag)
    out = np.empty(D, dtype=complex)
    cdef double complex[::1] a = out
    _decompose(&br[0, 0], &bi[0, 0], &sr[0], &si[0], &a[0], S, D)
    return out


def synthesize(amps, basis):
    cdef const double[:, ::1] br
    cdef const double[:, ::1] bi
    br, bi = _split(basis)
    cdef Py_ssize_t D = br.shape[0], S = br.shape[1]
    cdef const double complex[::1] a = np.ascontiguousarray(amps, dtype=complex)
    if a.shape[0] != D:
        raise ValueError("amplitude count does not match basis")
    cdef double[::1] sr = np.empty(S)
    cdef double[::1] si = np.empty(S)
    _synthesize(&br[0, 0], &bi[0, 0], &a[0], &sr[0], &si[0], S, D)
    return np.asarray(sr) + 1j * np.asarray(si)


def _c(arr, dtype):
    return None if arr is None else np.ascontiguousarray(arr, dtype=dtype)


def evolve_batch(basis, init, n_trials, qubit, ctrl, mats, gains, awgn,
                 probe_qubit, probe_ctrl, probe_mats, probe_gains, probe_awgn,
                 checkpoints):
    B = np.asarray(basis, dtype=complex)
    if B.ndim != 2 or B.shape[1] > MAX_D:
        raise ValueError(f"at most {MAX_D} amplitudes are supported")
    cdef const double complex[:, ::1] bm = np.ascontiguousarray(B)
    cdef const double complex[:, ::1] bc = np.ascontiguousarray(B.conj())
    cdef const double complex[::1] s0 = np.ascontiguousarray(init, dtype=complex)
    cdef int S = bm.shape[0], D = bm.shape[1]
    cdef Py_ssize_t T = n_trials
    cdef const int[::1] q = np.ascontiguousarray(qubit, dtype=np.intc)
    cdef const int[::1] c = np.ascontiguousarray(ctrl, dtype=np.intc)
    cdef const double complex[:, :, ::1] m = np.ascontiguousarray(mats, dtype=complex).reshape(-1, 2, 2)
    cdef const int[::1] pq = np.ascontiguousarray(probe_qubit, dtype=np.intc)
    cdef const int[::1] pc = np.ascontiguousarray(probe_ctrl, dtype=np.intc)
    cdef const double complex[:, :, ::1] pm = np.ascontiguousarray(probe_mats, dtype=complex).reshape(-1, 2, 2)
    cdef const int[::1] ck = np.ascontiguousarray(checkpoints, dtype=np.intc)
    cdef Py_ssize_t P = q.shape[0], Q = pq.shape[0], K = ck.shape[0]
    if s0.shape[0] != S:
        raise ValueError("initial signal does not match basis")

    cdef const double complex[:, :, ::1] g
    cdef const double complex[:, :, ::1] w
    cdef const double complex[:, :, :, ::1] pg
    cdef const double complex[:, :, :, ::1] pw
    cdef bint has_g = gains is not None
    cdef bint has_w = awgn is not None
    cdef bint has_pg = probe_gains is not None
    cdef bint has_pw = probe_awgn is not None
    cdef Py_ssize_t wl = 0, pwl = 0
    if has_g:
        g = _c(gains, complex)
    if has_w:
        w = _c(awgn, complex)
        wl = w.shape[2]
    if has_pg:
        pg = _c(probe_gains, complex)
    if has_pw:
        pw = _c(probe_awgn, complex)
        pwl = pw.shape[3]
    cdef bint w_band = wl == D
    cdef bint pw_band = pwl == D
    # strides (in elements) between consecutive trials
    cdef Py_ssize_t gs = 4 * P, ws = wl * P, pgs = 4 * K * Q, pws = pwl * K * Q

    out = np.empty((T, K, D), dtype=complex)
    cdef double complex[:, :, ::1] o = out
    cdef double complex[:, ::1] sig = np.empty((BLOCK, S), dtype=complex)
    cdef double complex[:, ::1] sp = np.empty((BLOCK, S), dtype=complex)
    cdef double complex[:, ::1] amps = np.empty((BLOCK, D), dtype=complex)
    cdef double[::1] level = np.empty(BLOCK)
    cdef Py_ssize_t t0, t, k, op, done, j
    cdef int nb
    cdef const double complex* gp
    cdef const double complex* wp

    if T == 0 or K == 0:
        return out
    with nogil:
        t0 = 0
        while t0 < T:
            nb = <int>min(BLOCK, T - t0)
            for t in range(nb):
                for j in range(S):
                    sig[t, j] = s0[j]
            done = 0
            for k in range(K):
                while done < ck[k]:
                    gp = &g[t0, done, 0] if has_g else NULL
                    wp = &w[t0, done, 0] if has_w else NULL
                    _apply_block(&bm[0, 0], &bc[0, 0], &sig[0, 0], &amps[0, 0], &level[0],
                                 q[done], c[done], &m[done, 0, 0], gp, gs, wp, ws, w_band, S, D, nb)
                    done += 1
                for t in range(nb):
                    for j in range(S):
                        sp[t, j] = sig[t, j]
                for op in range(Q):
                    gp = &pg[t0, k, op, 0] if has_pg else NULL
                    wp = &pw[t0, k, op, 0] if has_pw else NULL
                    _apply_block(&bm[0, 0], &bc[0, 0], &sp[0, 0], &amps[0, 0], &level[0],
                                 pq[op], pc[op], &pm[op, 0, 0], gp, pgs, wp, pws, pw_band, S, D, nb)
                _decompose_block(&bc[0, 0], &sp[0, 0], &o[t0, k, 0], <int>(K * D), S, D, nb)
            t0 += nb
    return out


def measure_batch(amps, meas_bits, meter, uniforms):
    cdef const double complex[:, :, ::1] A = np.ascontiguousarray(amps, dtype=complex)
    cdef const int[::1] bits = np.ascontiguousarray(meas_bits, dtype=np.intc)
    cdef Py_ssize_t T = A.shape[0], K = A.shape[1], D = A.shape[2], M = bits.shape[0]
    cdef Py_ssize_t L = 1 << M
    cdef const double[:, :, :, ::1] mt
    cdef const double[:, :, ::1] u
    cdef bint has_m = meter is not None
    cdef bint sample = uniforms is not None
    if has_m:
        mt = np.ascontiguousarray(meter, dtype=float)
    if sample:
        u = np.ascontiguousarray(uniforms, dtype=float)
    out = np.zeros((T, K, L))
    cdef double[:, :, ::1] o = out
    cdef double[::1] pw = np.empty(D)
    cdef Py_ssize_t t, k, j, x, leaf, idx, first, last
    cdef double v0, v1, tot, p0, prob
    cdef int b, bit
    cdef bint degenerate = False

    with nogil:
        for t in range(T):
            for k in range(K):
                if sample:
                    first = 0
                    last = 1
                else:
                    first = 0
                    last = L
                for leaf in range(first, last):
                    for x in range(D):
                        pw[x] = A[t, k, x].real * A[t, k, x].real + A[t, k, x].imag * A[t, k, x].imag
                    prob = 1.0
                    idx = 0
                    for j in range(M):
                        bit = bits[j]
                        v0 = 0.0
                        v1 = 0.0
                        for x in range(D):
                            if (x >> bit) & 1:
                                v1 += pw[x]
                            else:
                                v0 += pw[x]
                        if has_m:
                            v0 = v0 * mt[t, k, j, 0] * mt[t, k, j, 0]
                            v1 = v1 * mt[t, k, j, 1] * mt[t, k, j, 1]
                        tot = v0 + v1
                        if tot <= 0.0:
                            if sample or prob > 0.0:
                                degenerate = True
                                break
                            p0 = 0.0
                        else:
                            p0 = v0 / tot
                        if sample:
                            b = 1 if u[t, k, j] > p0 else 0
                        else:
                            b = (leaf >> j) & 1
                            prob = prob * (p0 if b == 0 else 1.0 - p0)
                        idx = idx | (b << j)
                        for x in range(D):
                            if ((x >> bit) & 1) != b:
                                pw[x] = 0.0
                    if degenerate:
                        break
                    if sample:
                        o[t, k, idx] = 1.0
                    else:
                        o[t, k, leaf] = prob
                if degenerate:
                    break
            if degenerate:
                break
    if degenerate:
        raise KernelDegenerateState("zero-norm signal at measurement")
    return out
