# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled propagation kernel.

Same algorithm as the pure-NumPy twin (_pykernel): piecewise-constant
midpoint exponential integration of the Lindblad master equation, with the
generator action evaluated structurally (two small matrix products plus a
flat collapse pair list) and exponentiated by a scaled Taylor expansion.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport zgemm

cnp.import_array()

BACKEND = "cython"

DEF THETA = 4.0
DEF MAX_TERMS = 40


cdef void _apply(double complex[:, ::1] K,
                 long[::1] pr1, long[::1] pr2, long[::1] pc1, long[::1] pc2,
                 double complex[::1] pw,
                 double complex[:, ::1] rho,
                 double complex[:, ::1] out) noexcept nogil:
    # out = K rho + rho K^dag + sum_p pw[p] rho[pc1, pc2] -> [pr1, pr2]
    #
    # BLAS sees the row-major buffers as their transposes, so
    #   out^T = rho^T K^T           <-  zgemm('N','N', a=rho, b=K)
    #   out^T += conj(K) rho^T      <-  zgemm('C','N', a=K,   b=rho)
    cdef int n = <int> K.shape[0]
    cdef double complex one = 1.0
    cdef double complex zero = 0.0
    cdef Py_ssize_t p
    zgemm("C", "N", &n, &n, &n, &one, &K[0, 0], &n, &rho[0, 0], &n,
          &zero, &out[0, 0], &n)
    zgemm("N", "N", &n, &n, &n, &one, &rho[0, 0], &n, &K[0, 0], &n,
          &one, &out[0, 0], &n)
    for p in range(pr1.shape[0]):
        out[pr1[p], pr2[p]] = out[pr1[p], pr2[p]] + pw[p] * rho[pc1[p], pc2[p]]


cdef double _fro(double complex[:, ::1] a) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            s += a[i, j].real * a[i, j].real + a[i, j].imag * a[i, j].imag
    return s ** 0.5


def lindblad_apply(K, pr1, pr2, pc1, pc2, pw, rho):
    """One application of the Lindblad generator to rho."""
    K = np.ascontiguousarray(K, dtype=complex)
    rho = np.ascontiguousarray(rho, dtype=complex)
    out = np.empty_like(rho)
    _apply(K, pr1, pr2, pc1, pc2, np.ascontiguousarray(pw, dtype=complex), rho, out)
    return out


cdef int _expm_apply(double complex[:, ::1] K,
                     long[::1] pr1, long[::1] pr2, long[::1] pc1, long[::1] pc2,
                     double complex[::1] pw,
                     double complex[:, ::1] rho,
                     double complex[:, ::1] term,
                     double complex[:, ::1] work,
                     double dt, double tol, double pair_weight_sum) noexcept nogil:
    cdef Py_ssize_t n = K.shape[0]
    cdef Py_ssize_t i, j, sub, order
    cdef double col, nb, hs, tnorm, onorm
    cdef Py_ssize_t m
    # crude 1-norm bound for sub-step selection
    nb = 0.0
    for j in range(n):
        col = 0.0
        for i in range(n):
            col += abs(K[i, j].real) + abs(K[i, j].imag)
        if col > nb:
            nb = col
    nb = (2.0 * nb + pair_weight_sum) * dt
    m = <Py_ssize_t> (nb / THETA) + 1
    hs = dt / m

    for sub in range(m):
        # out (accumulated in rho at the end) = sum_j (hs L)^j / j! rho
        for i in range(n):
            for j in range(n):
                term[i, j] = rho[i, j]
        for order in range(1, MAX_TERMS + 1):
            _apply(K, pr1, pr2, pc1, pc2, pw, term, work)
            tnorm = 0.0
            for i in range(n):
                for j in range(n):
                    term[i, j] = work[i, j] * (hs / order)
            for i in range(n):
                for j in range(n):
                    rho[i, j] = rho[i, j] + term[i, j]
            tnorm = _fro(term)
            onorm = _fro(rho)
            if tnorm <= tol * onorm:
                break
        else:
            return -1
    return 0


def propagate(K0, K1, fmid, pr1, pr2, pc1, pc2, pw, rho0, double dt,
              double tol=1e-12):
    """Propagate rho0 across len(fmid) uniform reporting intervals of width dt."""
    cdef Py_ssize_t steps = len(fmid)
    cdef Py_ssize_t n = rho0.shape[0]
    K0 = np.ascontiguousarray(K0, dtype=complex)
    K1 = np.ascontiguousarray(K1, dtype=complex)
    fmid_arr = np.ascontiguousarray(fmid, dtype=float)
    pr1 = np.ascontiguousarray(pr1, dtype=np.int64)
    pr2 = np.ascontiguousarray(pr2, dtype=np.int64)
    pc1 = np.ascontiguousarray(pc1, dtype=np.int64)
    pc2 = np.ascontiguousarray(pc2, dtype=np.int64)
    pw = np.ascontiguousarray(pw, dtype=complex)

    states = np.empty((steps + 1, n, n), dtype=complex)
    states[0] = rho0
    rho = np.array(rho0, dtype=complex, order="C")
    term = np.empty((n, n), dtype=complex)
    work = np.empty((n, n), dtype=complex)
    K = np.empty((n, n), dtype=complex)

    cdef double pair_weight_sum = float(np.abs(pw).sum()) if len(pw) else 0.0
    cdef double[::1] fview = fmid_arr
    cdef double complex[:, ::1] Kv = K
    cdef double complex[:, ::1] K0v = K0
    cdef double complex[:, ::1] K1v = K1
    cdef double complex[:, ::1] rhov = rho
    cdef double complex[:, ::1] termv = term
    cdef double complex[:, ::1] workv = work
    cdef long[::1] r1 = pr1
    cdef long[::1] r2 = pr2
    cdef long[::1] c1 = pc1
    cdef long[::1] c2 = pc2
    cdef double complex[::1] pwv = pw

    cdef Py_ssize_t k, i, j
    cdef double f, prev_f = np.nan
    cdef int status
    for k in range(steps):
        f = fview[k]
        if f != prev_f:
            with nogil:
                for i in range(n):
                    for j in range(n):
                        Kv[i, j] = K0v[i, j] + f * K1v[i, j]
            prev_f = f
        with nogil:
            status = _expm_apply(Kv, r1, r2, c1, c2, pwv, rhov, termv, workv,
                                 dt, tol, pair_weight_sum)
        if status != 0:
            raise RuntimeError("Taylor expansion of the propagator did not converge")
        states[k + 1] = rho
    return states
