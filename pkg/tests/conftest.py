import numpy as np
import pytest

from pseudoell import from_radii_axes, planar_two_link, reduced_arm_model


def random_orthonormal(rng, m):
    """Haar-ish random orthonormal basis via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(m, m)))
    return q * np.sign(np.diag(r))


def random_ellipsoid(rng, m, radii_range=(0.05, 5.0)):
    """Full-rank ellipsoid with log-uniform radii and random axes."""
    lo, hi = radii_range
    radii = np.exp(rng.uniform(np.log(lo), np.log(hi), size=m))
    return from_radii_axes(radii, random_orthonormal(rng, m))


def random_direction(rng, m):
    d = rng.normal(size=m)
    return d / np.linalg.norm(d)


@pytest.fixture
def planar():
    return planar_two_link(0.3, 0.3)


@pytest.fixture
def arm():
    return reduced_arm_model()
