"""Pure-numpy direction-scan kernels (fallback backend).

Accumulation orders are fixed and identical to the compiled kernels so that
both backends produce bit-identical doubles (the extension is built without
FMA contraction for the same reason).
"""

import numpy as np


def _cosines(axes, dirs):
    k = dirs.shape[0]
    m = axes.shape[0]
    cos = np.empty((k, m))
    for i in range(m):
        acc = dirs[:, 0] * axes[0, i]
        for c in range(1, m):
            acc = acc + dirs[:, c] * axes[c, i]
        cos[:, i] = acc
    return cos


def scan_metrics(radii, axes, n_nonzero, dirs, orth_tol):
    """Classical radius, pseudo radius, and lost-dimension flag per direction.

    radii must be sorted descending with zero-classified entries at the tail
    (indices >= n_nonzero). axes holds unit axis i in column i.
    """
    k = dirs.shape[0]
    m = radii.shape[0]
    cos = _cosines(axes, dirs)

    t = radii[0] * cos[:, 0]
    sq_sum = t * t
    for i in range(1, m):
        t = radii[i] * cos[:, i]
        sq_sum = sq_sum + t * t
    pseudo = np.sqrt(sq_sum)

    zero = np.zeros(k, dtype=bool)
    for i in range(n_nonzero, m):
        zero |= np.abs(cos[:, i]) > orth_tol
    if n_nonzero == 0:
        zero[:] = True
    inv_sum = np.zeros(k)
    for i in range(n_nonzero):
        inv_sum = inv_sum + (cos[:, i] * cos[:, i]) / (radii[i] * radii[i])
    zero |= inv_sum == 0.0
    with np.errstate(divide="ignore"):
        radius = 1.0 / np.sqrt(inv_sum)
    radius[zero] = 0.0
    return radius, pseudo, zero


def scan_max_abs_dev(
    radii_true, axes_true, nnz_true,
    radii_est, axes_est, nnz_est,
    dirs, orth_tol,
):
    """Worst-case |radius| and |pseudo radius| deviation over directions.

    Directions where the true ellipsoid loses the dimension are skipped for
    the radius maximum and returned as a skipped count.
    """
    r_t, l_t, zero_t = scan_metrics(radii_true, axes_true, nnz_true, dirs, orth_tol)
    r_e, l_e, _ = scan_metrics(radii_est, axes_est, nnz_est, dirs, orth_tol)
    dev_l = np.abs(l_t - l_e)
    max_dl = float(dev_l.max()) if dev_l.size else 0.0
    keep = ~zero_t
    dev_r = np.abs(r_t[keep] - r_e[keep])
    max_dr = float(dev_r.max()) if dev_r.size else 0.0
    return max_dr, max_dl, int(np.count_nonzero(zero_t))
