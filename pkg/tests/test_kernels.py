"""Cross-checks between the compiled scan kernels and the pure-python port.

The two implementations promise bitwise-identical output: accumulation
order is pinned in both, and the compiled extension is built without
contraction so every intermediate rounds the same way.
"""

import numpy as np
import pytest

import pseudoell
from pseudoell import ORTH_TOL, from_core, from_radii_axes
from pseudoell._kernels import _pykernels
from conftest import random_direction, random_ellipsoid, random_orthonormal

compiled = pytest.importorskip(
    "pseudoell._kernels._ckernels", reason="compiled kernels not built"
)


def random_pair(rng, m):
    """(ellipsoid, estimated ellipsoid) with a modest perturbation."""
    a = rng.normal(size=(m, m + 1))
    b = a + 0.05 * rng.normal(size=a.shape)
    return from_core(a @ a.T), from_core(b @ b.T)


def test_backend_reports_compiled():
    assert pseudoell.kernel_backend() == "compiled"


def test_scan_metrics_bitwise_equal():
    rng = np.random.default_rng(17)
    for case in range(400):
        m = int(rng.choice([2, 3]))
        if case % 5 == 0:
            # rank-deficient: one axis zeroed
            radii = np.append(rng.uniform(0.5, 2.0, size=m - 1), 0.0)
            ell = from_radii_axes(radii, random_orthonormal(rng, m))
        else:
            ell = random_ellipsoid(rng, m)
        dirs = np.array([random_direction(rng, m) for _ in range(32)])
        rc, lc, zc = compiled.scan_metrics(
            ell.radii, ell.axes, ell.n_nonzero, dirs, ORTH_TOL)
        rp, lp, zp = _pykernels.scan_metrics(
            ell.radii, ell.axes, ell.n_nonzero, dirs, ORTH_TOL)
        assert np.array_equal(rc, rp)
        assert np.array_equal(lc, lp)
        assert np.array_equal(zc, zp)


def test_scan_max_abs_dev_bitwise_equal():
    rng = np.random.default_rng(18)
    for _ in range(200):
        m = int(rng.choice([2, 3]))
        true_ell, est_ell = random_pair(rng, m)
        dirs = np.array([random_direction(rng, m) for _ in range(48)])
        out_c = compiled.scan_max_abs_dev(
            true_ell.radii, true_ell.axes, true_ell.n_nonzero,
            est_ell.radii, est_ell.axes, est_ell.n_nonzero, dirs, ORTH_TOL)
        out_p = _pykernels.scan_max_abs_dev(
            true_ell.radii, true_ell.axes, true_ell.n_nonzero,
            est_ell.radii, est_ell.axes, est_ell.n_nonzero, dirs, ORTH_TOL)
        assert out_c == out_p


def test_zero_flags_consistent_with_radius():
    rng = np.random.default_rng(19)
    radii = np.array([1.5, 0.0])
    ell = from_radii_axes(radii, np.eye(2))
    dirs = np.array([random_direction(rng, 2) for _ in range(64)])
    radius, _, zero = compiled.scan_metrics(
        ell.radii, ell.axes, ell.n_nonzero, dirs, ORTH_TOL)
    assert np.array_equal(zero, radius == 0.0)
    # generic directions all touch the null axis
    assert zero.all()


def test_skipped_count_reports_collapsed_true_directions():
    rng = np.random.default_rng(20)
    true_ell = from_radii_axes([1.0, 0.0], np.eye(2))
    est_ell = random_ellipsoid(rng, 2)
    dirs = np.array([[1.0, 0.0], [0.0, 1.0],
                     [np.cos(0.3), np.sin(0.3)]])
    _, _, skipped = compiled.scan_max_abs_dev(
        true_ell.radii, true_ell.axes, true_ell.n_nonzero,
        est_ell.radii, est_ell.axes, est_ell.n_nonzero, dirs, ORTH_TOL)
    # (0, 1) and the tilted row hit the null axis of the true ellipsoid
    assert skipped == 2


def test_python_port_accepts_frozen_arrays():
    ell = random_ellipsoid(np.random.default_rng(21), 3)
    dirs = np.array([random_direction(np.random.default_rng(22), 3)])
    dirs.flags.writeable = False
    out = _pykernels.scan_metrics(ell.radii, ell.axes, ell.n_nonzero,
                                  dirs, ORTH_TOL)
    assert out[0].shape == (1,)
