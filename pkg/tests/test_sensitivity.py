import math

import numpy as np
import pytest

from pseudoell import (
    NumericalError,
    SingularSensitivityError,
    ValidationError,
    analytic_partials,
    finite_difference_partials,
    from_radii_axes,
    perturbation_sweep,
    sample_directions,
    write_sweep_csv,
)
from conftest import random_direction, random_ellipsoid

GRAD_FIELDS = ("dradius_dradii", "dpseudo_dradii",
               "dradius_dangles", "dpseudo_dangles")


def assert_reports_close(got, want, rel=1e-4, floor=1e-6):
    for name in GRAD_FIELDS:
        a = getattr(got, name)
        b = getattr(want, name)
        tol = np.maximum(floor, rel * np.abs(b))
        assert np.all(np.abs(a - b) <= tol), (name, a, b)


def test_partials_frozen_two_axis_case():
    # radii (2, 1), direction at 45 degrees: all four partials in closed form
    ell = from_radii_axes([2.0, 1.0], np.eye(2))
    d = np.array([1.0, 1.0]) / math.sqrt(2.0)
    rep = analytic_partials(ell, d)
    r = math.sqrt(8.0 / 5.0)
    l = math.sqrt(2.5)
    assert math.isclose(rep.radius, r, rel_tol=1e-15)
    assert math.isclose(rep.pseudo_radius, l, rel_tol=1e-15)
    assert np.allclose(rep.axis_angles, [math.pi / 4, math.pi / 4])
    assert np.allclose(rep.dradius_dradii, [r**3 / 16.0, r**3 / 2.0])
    assert np.allclose(rep.dpseudo_dradii, [1.0 / l, 0.5 / l])
    assert np.allclose(rep.dradius_dangles, [r**3 / 8.0, r**3 / 2.0])
    assert np.allclose(rep.dpseudo_dangles, [-2.0 / l, -0.5 / l])


def test_partials_match_finite_differences():
    rng = np.random.default_rng(303)
    for _ in range(200):
        m = int(rng.choice([2, 3]))
        ell = random_ellipsoid(rng, m)
        d = random_direction(rng, m)
        assert_reports_close(analytic_partials(ell, d),
                             finite_difference_partials(ell, d))


def test_angle_partials_have_opposite_signs():
    rng = np.random.default_rng(304)
    checked = 0
    for _ in range(100):
        m = int(rng.choice([2, 3]))
        rep = analytic_partials(random_ellipsoid(rng, m),
                                random_direction(rng, m))
        sin2 = np.sin(2.0 * rep.axis_angles)
        mask = np.abs(sin2) > 1e-12
        prod = rep.dradius_dangles[mask] * rep.dpseudo_dangles[mask]
        assert np.all(prod < 0.0)
        checked += int(mask.sum())
    assert checked > 100


def test_partials_scale_with_radii():
    rng = np.random.default_rng(305)
    ell = random_ellipsoid(rng, 3)
    d = random_direction(rng, 3)
    c = 3.7
    scaled = from_radii_axes(c * ell.radii, ell.axes)
    base = analytic_partials(ell, d)
    big = analytic_partials(scaled, d)
    # radius partials are dimensionless in the radii, angle partials scale
    assert np.allclose(big.dradius_dradii, base.dradius_dradii, rtol=1e-12)
    assert np.allclose(big.dpseudo_dradii, base.dpseudo_dradii, rtol=1e-12)
    assert np.allclose(big.dradius_dangles, c * base.dradius_dangles, rtol=1e-12)
    assert np.allclose(big.dpseudo_dangles, c * base.dpseudo_dangles, rtol=1e-12)


def test_partials_reject_rank_deficiency():
    ell = from_radii_axes([1.0, 0.0], np.eye(2))
    with pytest.raises(SingularSensitivityError):
        analytic_partials(ell, np.array([0.0, 1.0]))
    with pytest.raises(SingularSensitivityError):
        finite_difference_partials(ell, np.array([0.0, 1.0]))


def test_finite_difference_step_validation():
    ell = from_radii_axes([2.0, 1.0], np.eye(2))
    d = np.array([1.0, 0.0])
    with pytest.raises(ValidationError):
        finite_difference_partials(ell, d, step=0.0)
    with pytest.raises(ValidationError):
        finite_difference_partials(ell, d, step=1e-2)
    tiny = from_radii_axes([1.0, 1e-7], np.eye(2))
    with pytest.raises(NumericalError):
        finite_difference_partials(tiny, d, step=1e-6)


def test_sample_directions_layout():
    d2 = sample_directions(2, 8)
    assert d2.shape == (8, 2)
    assert np.allclose(d2[0], [1.0, 0.0])
    assert np.allclose(np.linalg.norm(d2, axis=1), 1.0)
    d3 = sample_directions(3, 200)
    assert d3.shape == (200, 3)
    assert np.allclose(np.linalg.norm(d3, axis=1), 1.0)
    # z coverage spans both hemispheres nearly evenly
    assert d3[:, 2].max() > 0.98 and d3[:, 2].min() < -0.98
    with pytest.raises(ValidationError):
        sample_directions(4, 10)
    with pytest.raises(ValidationError):
        sample_directions(2, 0)


def test_sweep_validation(planar):
    q = np.radians([30.0, 90.0])
    with pytest.raises(ValidationError):
        perturbation_sweep(planar, q, grid_n=20)
    with pytest.raises(ValidationError):
        perturbation_sweep(planar, q, grid_n=1)
    with pytest.raises(ValidationError):
        perturbation_sweep(planar, q, range_rad=-0.1)
    with pytest.raises(ValidationError):
        perturbation_sweep(planar, q, dir_samples=32)
    with pytest.raises(ValidationError):
        perturbation_sweep(planar, q, threads=0)


def test_sweep_center_cell_is_zero(planar):
    grid = perturbation_sweep(planar, np.radians([30.0, 90.0]), grid_n=5,
                              dir_samples=64)
    c = grid.delta_q1.shape[0] // 2
    assert grid.delta_q1[c] == 0.0
    assert grid.max_abs_dr[c, c] == 0.0
    assert grid.max_abs_dl[c, c] == 0.0


def test_sweep_zero_range(planar):
    grid = perturbation_sweep(planar, np.radians([30.0, 10.0]),
                              range_rad=0.0, grid_n=3, dir_samples=64)
    assert np.all(grid.delta_q1 == 0.0)
    assert np.all(grid.max_abs_dr == 0.0)
    assert np.all(grid.max_abs_dl == 0.0)


def test_sweep_range_extension_is_superset(planar):
    # doubling the range at doubled resolution keeps the original offsets;
    # dyadic range and step make the shared offsets exactly representable
    q = np.radians([30.0, 60.0])
    small = perturbation_sweep(planar, q, range_rad=0.03125, grid_n=9,
                               dir_samples=128)
    large = perturbation_sweep(planar, q, range_rad=0.0625, grid_n=17,
                               dir_samples=128)
    assert np.array_equal(large.delta_q1[4:13], small.delta_q1)
    assert np.array_equal(large.max_abs_dr[4:13, 4:13], small.max_abs_dr)
    assert np.array_equal(large.max_abs_dl[4:13, 4:13], small.max_abs_dl)
    assert large.max_abs_dr.max() >= small.max_abs_dr.max()
    assert large.max_abs_dl.max() >= small.max_abs_dl.max()


def test_sweep_thread_count_invariance(planar):
    q = np.radians([30.0, 10.0])
    serial = perturbation_sweep(planar, q, grid_n=9, dir_samples=128)
    for threads in (2, 5):
        parallel = perturbation_sweep(planar, q, grid_n=9, dir_samples=128,
                                      threads=threads)
        assert np.array_equal(serial.max_abs_dr, parallel.max_abs_dr)
        assert np.array_equal(serial.max_abs_dl, parallel.max_abs_dl)


def test_sweep_needs_two_joints():
    from pseudoell import JointSpec, KinematicChain
    single = KinematicChain(
        joints=(JointSpec(axis=np.array([0.0, 0.0, 1.0]),
                          offset=np.zeros(3)),),
        ee_offset=np.array([0.3, 0.0, 0.0]),
    )
    with pytest.raises(ValidationError):
        perturbation_sweep(single, [0.0])


def test_sweep_csv_layout(tmp_path, planar):
    grid = perturbation_sweep(planar, np.radians([30.0, 90.0]), grid_n=3,
                              range_rad=math.radians(1.0), dir_samples=64)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(grid, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "dq1_deg,dq2_deg,max_abs_dr,max_abs_dl"
    assert len(lines) == 1 + 9
    first = lines[1].split(",")
    assert float(first[0]) == -1.0
    assert float(first[1]) == -1.0
    # row-major: second row advances the q2 offset
    second = lines[2].split(",")
    assert float(second[0]) == -1.0
    assert float(second[1]) == 0.0
