"""Sensitivity of the directional metrics to ellipsoid shape errors.

Both metrics are closed-form functions of the principal radii r_i and of
the alignment angles theta_i between the query direction and each
principal axis:

    radius  r = [sum_i cos^2(theta_i) / r_i^2]^(-1/2)
    pseudo  l = [sum_i r_i^2 cos^2(theta_i)]^(1/2)

so their partial derivatives with respect to r_i and theta_i are
available analytically.  The radius partials carry a factor r^3 / r_i^3
that blows up near rank deficiency, while the pseudo-radius partials
stay bounded by the radii themselves; comparing the two gradients is
the quantitative form of the robustness argument.

Finite differences here perturb the formula inputs directly: each
theta_i enters through its cosine, and a perturbed cos(theta_i +/- h)
is substituted while the other alignment cosines are held fixed.  A
geometric rotation of the direction could not isolate one angle (the
squared cosines are coupled through the unit constraint), so the
derivative check lives in formula space where the partials are defined.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from pseudoell import _kernels
from pseudoell.chain import KinematicChain
from pseudoell.ellipsoid import (
    ORTH_TOL,
    Ellipsoid,
    _check_direction,
    from_jacobian,
)
from pseudoell.errors import (
    DegenerateDirectionError,
    NumericalError,
    SingularSensitivityError,
    ValidationError,
)


@dataclass(frozen=True)
class SensitivityReport:
    """Metric values and their gradients at one (ellipsoid, direction) pair.

    axis_angles are the alignment angles theta_i in [0, pi/2]; the four
    gradient arrays are indexed by principal axis, matching radii order.
    inv_core_form is sum cos^2(theta_i)/r_i^2 (equal to 1/r^2) and
    core_form is sum r_i^2 cos^2(theta_i) (equal to l^2).
    """

    radius: float
    pseudo_radius: float
    inv_core_form: float
    core_form: float
    axis_angles: np.ndarray
    dradius_dradii: np.ndarray
    dpseudo_dradii: np.ndarray
    dradius_dangles: np.ndarray
    dpseudo_dangles: np.ndarray

    def __post_init__(self):
        for name in ("axis_angles", "dradius_dradii", "dpseudo_dradii",
                     "dradius_dangles", "dpseudo_dangles"):
            getattr(self, name).flags.writeable = False


def _radius_formula(radii: np.ndarray, cosines: np.ndarray) -> float:
    inv_sum = float(np.sum(cosines**2 / radii**2))
    return 1.0 / math.sqrt(inv_sum)


def _pseudo_formula(radii: np.ndarray, cosines: np.ndarray) -> float:
    return math.sqrt(float(np.sum(radii**2 * cosines**2)))


def _full_rank_inputs(ell: Ellipsoid, direction):
    if ell.rank_deficient:
        raise SingularSensitivityError(
            "sensitivity formulas require a full-rank ellipsoid "
            f"(rank {ell.n_nonzero} of {ell.dim})"
        )
    d = _check_direction(direction, ell.dim)
    cosines = np.abs(ell.axes.T @ d)
    np.clip(cosines, 0.0, 1.0, out=cosines)
    return d, cosines


def analytic_partials(ell: Ellipsoid, direction) -> SensitivityReport:
    """Closed-form gradients of both metrics in radii and angles.

    Requires full rank (the radius formula and its partials are undefined
    otherwise).  Raises DegenerateDirectionError in the measure-zero case
    of a vanishing pseudo radius.
    """
    _, cos = _full_rank_inputs(ell, direction)
    radii = ell.radii
    angles = np.arccos(cos)
    sin2 = np.sin(2.0 * angles)

    r = _radius_formula(radii, cos)
    l = _pseudo_formula(radii, cos)
    if l == 0.0:
        raise DegenerateDirectionError(
            "pseudo radius vanished; its partials are undefined here"
        )
    return SensitivityReport(
        radius=r,
        pseudo_radius=l,
        inv_core_form=1.0 / r**2,
        core_form=l**2,
        axis_angles=angles,
        dradius_dradii=r**3 * cos**2 / radii**3,
        dpseudo_dradii=radii * cos**2 / l,
        dradius_dangles=r**3 * sin2 / (2.0 * radii**2),
        dpseudo_dangles=-(radii**2) * sin2 / (2.0 * l),
    )


def finite_difference_partials(ell: Ellipsoid, direction,
                               step: float = 1e-6) -> SensitivityReport:
    """Central-difference gradients of both metrics in formula space.

    Radii are perturbed directly; each angle is perturbed through its
    cosine with the other alignment cosines held fixed (see the module
    docstring).  Scalar fields hold the unperturbed base values.
    """
    if not 0.0 < step <= 1e-3:
        raise ValidationError(f"step must lie in (0, 1e-3], got {step}")
    _, cos = _full_rank_inputs(ell, direction)
    radii = ell.radii
    if float(radii.min()) <= 2.0 * step:
        raise NumericalError(
            "finite-difference step too large relative to the smallest radius"
        )
    angles = np.arccos(cos)
    m = ell.dim

    r0 = _radius_formula(radii, cos)
    l0 = _pseudo_formula(radii, cos)
    if l0 == 0.0:
        raise DegenerateDirectionError(
            "pseudo radius vanished; its partials are undefined here"
        )

    dr_dradii = np.empty(m)
    dl_dradii = np.empty(m)
    dr_dangles = np.empty(m)
    dl_dangles = np.empty(m)
    for i in range(m):
        r_hi = radii.copy()
        r_lo = radii.copy()
        r_hi[i] += step
        r_lo[i] -= step
        dr_dradii[i] = (_radius_formula(r_hi, cos)
                        - _radius_formula(r_lo, cos)) / (2.0 * step)
        dl_dradii[i] = (_pseudo_formula(r_hi, cos)
                        - _pseudo_formula(r_lo, cos)) / (2.0 * step)

        c_hi = cos.copy()
        c_lo = cos.copy()
        c_hi[i] = math.cos(angles[i] + step)
        c_lo[i] = math.cos(angles[i] - step)
        dr_dangles[i] = (_radius_formula(radii, c_hi)
                         - _radius_formula(radii, c_lo)) / (2.0 * step)
        dl_dangles[i] = (_pseudo_formula(radii, c_hi)
                         - _pseudo_formula(radii, c_lo)) / (2.0 * step)

    return SensitivityReport(
        radius=r0, pseudo_radius=l0,
        inv_core_form=1.0 / r0**2, core_form=l0**2,
        axis_angles=angles,
        dradius_dradii=dr_dradii, dpseudo_dradii=dl_dradii,
        dradius_dangles=dr_dangles, dpseudo_dangles=dl_dangles,
    )


def sample_directions(dim: int, count: int) -> np.ndarray:
    """Deterministic well-spread unit directions, shape (count, dim).

    dim 2 uses evenly spaced angles starting at +x; dim 3 uses a
    Fibonacci sphere lattice.
    """
    if dim not in (2, 3):
        raise ValidationError(f"direction sampling supports dim 2 and 3, got {dim}")
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise ValidationError(f"count must be a positive integer, got {count}")
    if dim == 2:
        t = 2.0 * np.pi * np.arange(count) / count
        dirs = np.column_stack([np.cos(t), np.sin(t)])
    else:
        k = np.arange(count, dtype=np.float64)
        z = 1.0 - 2.0 * (k + 0.5) / count
        rho = np.sqrt(np.clip(1.0 - z**2, 0.0, None))
        golden = np.pi * (3.0 - math.sqrt(5.0))
        t = golden * k
        dirs = np.column_stack([rho * np.cos(t), rho * np.sin(t), z])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return dirs


@dataclass(frozen=True)
class SweepGrid:
    """Worst-case metric deviations over a grid of joint-angle errors.

    Cell [i, j] perturbs the first joint by delta_q1[i] and the second
    by delta_q2[j] (radians) and records the largest absolute deviation
    of each metric from its unperturbed value across the direction set.
    skipped_directions counts directions excluded from the radius scan
    because the unperturbed radius collapses there.
    """

    delta_q1: np.ndarray
    delta_q2: np.ndarray
    max_abs_dr: np.ndarray
    max_abs_dl: np.ndarray
    base_config: np.ndarray
    direction_samples: int
    skipped_directions: int

    def __post_init__(self):
        for name in ("delta_q1", "delta_q2", "max_abs_dr", "max_abs_dl",
                     "base_config"):
            getattr(self, name).flags.writeable = False


def perturbation_sweep(chain: KinematicChain, base_config,
                       range_rad: float = math.radians(5.0),
                       grid_n: int = 21, dir_samples: int | None = None,
                       weight=None, threads: int = 1) -> SweepGrid:
    """Sweep joint-angle errors on the first two joints of a chain.

    The grid spans [-range_rad, +range_rad] with grid_n points per axis
    (odd, at least 3, so the exact center is included); a zero range
    yields all-zero grids.  dir_samples defaults to 720 directions in
    the plane and 1024 on the sphere.  threads > 1 evaluates grid cells
    on a thread pool; results are identical regardless of thread count.
    """
    q0 = chain.check_config(base_config)
    if chain.n_joints < 2:
        raise ValidationError("perturbation sweep needs at least 2 joints")
    if not isinstance(grid_n, int) or isinstance(grid_n, bool):
        raise ValidationError("grid_n must be an integer")
    if grid_n < 3 or grid_n % 2 == 0:
        raise ValidationError(f"grid_n must be odd and at least 3, got {grid_n}")
    if not math.isfinite(range_rad) or range_rad < 0.0:
        raise ValidationError(f"range_rad must be non-negative, got {range_rad}")
    if dir_samples is None:
        dir_samples = 720 if chain.task_dim == 2 else 1024
    if not isinstance(dir_samples, int) or isinstance(dir_samples, bool):
        raise ValidationError("dir_samples must be an integer")
    if dir_samples < 64:
        raise ValidationError(f"dir_samples must be at least 64, got {dir_samples}")
    if not isinstance(threads, int) or isinstance(threads, bool) or threads < 1:
        raise ValidationError(f"threads must be a positive integer, got {threads}")

    deltas = np.linspace(-range_rad, range_rad, grid_n)
    dirs = sample_directions(chain.task_dim, dir_samples)
    true_ell = from_jacobian(chain.jacobian(q0), weight)

    max_dr = np.empty((grid_n, grid_n))
    max_dl = np.empty((grid_n, grid_n))
    skipped = np.zeros((grid_n, grid_n), dtype=np.int64)

    def run_cell(cell: int) -> None:
        i, j = divmod(cell, grid_n)
        q = q0.copy()
        q[0] += deltas[i]
        q[1] += deltas[j]
        est_ell = from_jacobian(chain.jacobian(q), weight)
        max_dr[i, j], max_dl[i, j], skipped[i, j] = _kernels.scan_max_abs_dev(
            true_ell.radii, true_ell.axes, true_ell.n_nonzero,
            est_ell.radii, est_ell.axes, est_ell.n_nonzero,
            dirs, ORTH_TOL)

    cells = range(grid_n * grid_n)
    if threads == 1:
        for cell in cells:
            run_cell(cell)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # consume the iterator so worker exceptions propagate
            list(pool.map(run_cell, cells))

    return SweepGrid(
        delta_q1=deltas.copy(), delta_q2=deltas.copy(),
        max_abs_dr=max_dr, max_abs_dl=max_dl,
        base_config=q0, direction_samples=int(dir_samples),
        skipped_directions=int(skipped[0, 0]),
    )


def write_sweep_csv(grid: SweepGrid, path) -> None:
    """Write sweep results as CSV rows dq1_deg,dq2_deg,max_abs_dr,max_abs_dl."""
    n = grid.delta_q1.shape[0]
    dq1_deg = np.degrees(grid.delta_q1)
    dq2_deg = np.degrees(grid.delta_q2)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("dq1_deg,dq2_deg,max_abs_dr,max_abs_dl\n")
        for i in range(n):
            for j in range(n):
                fh.write(f"{float(dq1_deg[i])!r},{float(dq2_deg[j])!r},"
                         f"{float(grid.max_abs_dr[i, j])!r},"
                         f"{float(grid.max_abs_dl[i, j])!r}\n")
