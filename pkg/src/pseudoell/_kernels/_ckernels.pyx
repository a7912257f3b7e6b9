# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled direction-scan kernels (hot loops of sweeps and mesh sampling).

Arithmetic mirrors _pykernels operation for operation; compiled with
-ffp-contract=off so both backends agree bit for bit.
"""

from libc.math cimport fabs, sqrt

import numpy as np

DEF MAX_DIM = 8


cdef inline void _metrics_one(
    const double* radii, const double* axes, Py_ssize_t m, Py_ssize_t nnz,
    const double* d, double orth_tol,
    double* radius_out, double* pseudo_out, unsigned char* zero_out,
) noexcept nogil:
    cdef double cos[MAX_DIM]
    cdef double acc, t, inv_sum, sq_sum
    cdef Py_ssize_t i, c
    cdef bint zero = 0

    for i in range(m):
        acc = d[0] * axes[i]
        for c in range(1, m):
            acc = acc + d[c] * axes[c * m + i]
        cos[i] = acc

    t = radii[0] * cos[0]
    sq_sum = t * t
    for i in range(1, m):
        t = radii[i] * cos[i]
        sq_sum = sq_sum + t * t
    pseudo_out[0] = sqrt(sq_sum)

    for i in range(nnz, m):
        if fabs(cos[i]) > orth_tol:
            zero = 1
    if nnz == 0:
        zero = 1
    inv_sum = 0.0
    for i in range(nnz):
        inv_sum = inv_sum + (cos[i] * cos[i]) / (radii[i] * radii[i])
    if inv_sum == 0.0:
        zero = 1
    radius_out[0] = 0.0 if zero else 1.0 / sqrt(inv_sum)
    zero_out[0] = zero


def scan_metrics(const double[::1] radii, const double[:, ::1] axes,
                 Py_ssize_t n_nonzero, const double[:, ::1] dirs,
                 double orth_tol):
    cdef Py_ssize_t k = dirs.shape[0]
    cdef Py_ssize_t m = radii.shape[0]
    if m < 1 or m > MAX_DIM:
        raise ValueError(f"dimension {m} outside supported range")
    if axes.shape[0] != m or axes.shape[1] != m or dirs.shape[1] != m:
        raise ValueError("shape mismatch between radii, axes, and dirs")
    if n_nonzero < 0 or n_nonzero > m:
        raise ValueError("n_nonzero out of range")

    radius_arr = np.empty(k)
    pseudo_arr = np.empty(k)
    zero_arr = np.empty(k, dtype=np.uint8)
    cdef double[::1] radius_v = radius_arr
    cdef double[::1] pseudo_v = pseudo_arr
    cdef unsigned char[::1] zero_v = zero_arr
    cdef Py_ssize_t dd

    with nogil:
        for dd in range(k):
            _metrics_one(&radii[0], &axes[0, 0], m, n_nonzero, &dirs[dd, 0],
                         orth_tol, &radius_v[dd], &pseudo_v[dd], &zero_v[dd])
    return radius_arr, pseudo_arr, zero_arr.view(np.bool_)


def scan_max_abs_dev(const double[::1] radii_true,
                     const double[:, ::1] axes_true, Py_ssize_t nnz_true,
                     const double[::1] radii_est,
                     const double[:, ::1] axes_est, Py_ssize_t nnz_est,
                     const double[:, ::1] dirs, double orth_tol):
    cdef Py_ssize_t k = dirs.shape[0]
    cdef Py_ssize_t m = radii_true.shape[0]
    if m < 1 or m > MAX_DIM:
        raise ValueError(f"dimension {m} outside supported range")
    if (axes_true.shape[0] != m or axes_true.shape[1] != m
            or radii_est.shape[0] != m or axes_est.shape[0] != m
            or axes_est.shape[1] != m or dirs.shape[1] != m):
        raise ValueError("shape mismatch between radii, axes, and dirs")
    if nnz_true < 0 or nnz_true > m or nnz_est < 0 or nnz_est > m:
        raise ValueError("n_nonzero out of range")

    cdef double r_t, l_t, r_e, l_e, dev
    cdef unsigned char zero_t, zero_e
    cdef double max_dr = 0.0, max_dl = 0.0
    cdef Py_ssize_t skipped = 0
    cdef Py_ssize_t dd

    with nogil:
        for dd in range(k):
            _metrics_one(&radii_true[0], &axes_true[0, 0], m, nnz_true,
                         &dirs[dd, 0], orth_tol, &r_t, &l_t, &zero_t)
            _metrics_one(&radii_est[0], &axes_est[0, 0], m, nnz_est,
                         &dirs[dd, 0], orth_tol, &r_e, &l_e, &zero_e)
            dev = fabs(l_t - l_e)
            if dev > max_dl:
                max_dl = dev
            if zero_t:
                skipped += 1
            else:
                dev = fabs(r_t - r_e)
                if dev > max_dr:
                    max_dr = dev
    return max_dr, max_dl, skipped
