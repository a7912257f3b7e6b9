"""Direction-scan kernels with a compiled core and a pure-python fallback.

The compiled extension is preferred when its build artifact is importable;
otherwise the numpy implementation takes over with identical semantics.
Both produce bit-identical doubles (fixed accumulation order, no FMA).
"""

import numpy as np

try:
    from pseudoell._kernels import _ckernels as _impl

    BACKEND = "compiled"
except ImportError:
    from pseudoell._kernels import _pykernels as _impl

    BACKEND = "python"


def get_backend() -> str:
    """Name of the kernel backend in use, "compiled" or "python"."""
    return BACKEND


def _as_c(a, ndim):
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out.ndim != ndim:
        raise ValueError(f"expected {ndim}-d array, got {out.ndim}-d")
    return out


def scan_metrics(radii, axes, n_nonzero, dirs, orth_tol):
    """Directional radius, pseudo radius, and zero flags for each direction.

    radii must be sorted descending with the first n_nonzero entries
    positive; axes holds the matching unit vectors as columns; dirs is
    (k, m) with unit rows.  Returns (radius, pseudo, zero_flags) arrays
    of length k; radius is exactly 0.0 where zero_flags is set.
    """
    return _impl.scan_metrics(
        _as_c(radii, 1), _as_c(axes, 2), int(n_nonzero), _as_c(dirs, 2),
        float(orth_tol),
    )


def scan_max_abs_dev(radii_true, axes_true, nnz_true,
                     radii_est, axes_est, nnz_est, dirs, orth_tol):
    """Worst-case |metric_true - metric_est| over a direction set.

    The pseudo-radius deviation runs over every direction; the radius
    deviation skips directions where the true radius is zero.  Returns
    (max_abs_dr, max_abs_dl, n_skipped).
    """
    return _impl.scan_max_abs_dev(
        _as_c(radii_true, 1), _as_c(axes_true, 2), int(nnz_true),
        _as_c(radii_est, 1), _as_c(axes_est, 2), int(nnz_est),
        _as_c(dirs, 2), float(orth_tol),
    )
