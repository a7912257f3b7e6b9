"""Manipulability ellipsoid: construction, directional metrics, meshing.

The ellipsoid of a chain at a configuration is the image of the unit ball
of weighted joint velocities under the task Jacobian.  Its principal radii
and axes come from the eigendecomposition of the core matrix J W J^T.

Two scalar summaries along a unit task direction nu:

* the directional radius, the distance from the origin to the ellipsoid
  surface along nu, and
* the pseudo radius, the root of the quadratic form nu^T (J W J^T) nu,
  equal to the root-sum-square of the per-axis projection lengths.

The pseudo radius never drops below the directional radius and stays
finite and smooth near singular configurations, which is what makes it
the better behaved objective of the two.
"""

from dataclasses import dataclass, field

import numpy as np

from pseudoell import _kernels
from pseudoell.errors import (
    NumericalError,
    ValidationError,
    WeightMatrixError,
)

# Alignment threshold for the zero-radius rule: a direction counts as
# leaving the range space when its cosine against a null axis exceeds this.
ORTH_TOL = 1e-8

# Relative eigenvalue cutoff below which a principal radius is treated as 0.
DEFAULT_RANK_TOL = 1e-8

_SYM_TOL = 1e-10
_UNIT_TOL = 1e-12
_MAX_DIM = 8


def _check_direction(direction, dim: int) -> np.ndarray:
    d = np.asarray(direction, dtype=np.float64)
    if d.shape != (dim,):
        raise ValidationError(
            f"direction must have shape ({dim},), got {d.shape}"
        )
    if not np.all(np.isfinite(d)):
        raise ValidationError("direction has non-finite entries")
    norm = float(np.linalg.norm(d))
    if abs(norm - 1.0) > _UNIT_TOL:
        raise ValidationError(
            f"direction must be a unit vector, norm deviates by {abs(norm - 1.0):.3e}"
        )
    return d


def check_weight_matrix(weight, n_joints: int) -> np.ndarray:
    """Validate a joint-space weight matrix (symmetric positive definite)."""
    w = np.asarray(weight, dtype=np.float64)
    if w.shape != (n_joints, n_joints):
        raise WeightMatrixError(
            f"weight must have shape ({n_joints}, {n_joints}), got {w.shape}"
        )
    if not np.all(np.isfinite(w)):
        raise WeightMatrixError("weight matrix has non-finite entries")
    scale = max(float(np.abs(w).max()), 1.0)
    if float(np.abs(w - w.T).max()) > _SYM_TOL * scale:
        raise WeightMatrixError("weight matrix is not symmetric")
    eigvals = np.linalg.eigvalsh((w + w.T) / 2.0)
    if eigvals[0] <= _UNIT_TOL * max(float(eigvals[-1]), 1.0):
        raise WeightMatrixError("weight matrix is not positive definite")
    return w


def core_matrix(jac, weight=None) -> np.ndarray:
    """Ellipsoid core J W J^T (symmetrized), identity weight by default."""
    j = np.asarray(jac, dtype=np.float64)
    if j.ndim != 2:
        raise ValidationError(f"jacobian must be 2-d, got {j.ndim}-d")
    if not np.all(np.isfinite(j)):
        raise ValidationError("jacobian has non-finite entries")
    if weight is None:
        core = j @ j.T
    else:
        w = check_weight_matrix(weight, j.shape[1])
        core = j @ w @ j.T
    return (core + core.T) / 2.0


@dataclass(frozen=True)
class Ellipsoid:
    """Principal-axis form of a manipulability ellipsoid.

    radii are sorted descending; axes holds the matching unit vectors as
    columns.  A radius at or below rank_tolerance times the largest one
    is classified as zero (rank deficiency along that axis).
    """

    core: np.ndarray
    radii: np.ndarray
    axes: np.ndarray
    rank_tolerance: float = DEFAULT_RANK_TOL

    def __post_init__(self):
        for name in ("core", "radii", "axes"):
            arr = getattr(self, name)
            arr.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.radii.shape[0]

    @property
    def n_nonzero(self) -> int:
        """Number of radii classified as nonzero (the numerical rank)."""
        cutoff = self.rank_tolerance * float(self.radii[0])
        return int(np.sum(self.radii > cutoff)) if self.radii[0] > 0.0 else 0

    @property
    def rank_deficient(self) -> bool:
        return self.n_nonzero < self.dim


def from_core(core, rank_tolerance: float = DEFAULT_RANK_TOL) -> Ellipsoid:
    """Build an ellipsoid from its core matrix via eigendecomposition.

    The core must be symmetric positive semidefinite.  Eigenvalues are
    clamped at zero when marginally negative from round-off; eigenvectors
    get a deterministic sign (first non-negligible component positive).
    """
    c = np.asarray(core, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValidationError(f"core must be square, got shape {c.shape}")
    m = c.shape[0]
    if not 1 <= m <= _MAX_DIM:
        raise ValidationError(f"core dimension {m} outside supported range 1..{_MAX_DIM}")
    if not np.all(np.isfinite(c)):
        raise ValidationError("core matrix has non-finite entries")
    scale = max(float(np.abs(c).max()), 1.0)
    if float(np.abs(c - c.T).max()) > _SYM_TOL * scale:
        raise ValidationError("core matrix is not symmetric")
    if not 0.0 < rank_tolerance < 1.0:
        raise ValidationError("rank_tolerance must lie in (0, 1)")

    sym = (c + c.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    lam_max = float(eigvals[-1])
    if float(eigvals[0]) < -1e-10 * max(lam_max, 1.0):
        raise NumericalError(
            f"core matrix is not positive semidefinite (lambda_min={eigvals[0]:.3e})"
        )
    eigvals = np.clip(eigvals, 0.0, None)

    order = np.argsort(eigvals, kind="stable")[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    for i in range(m):
        col = eigvecs[:, i]
        lead = np.flatnonzero(np.abs(col) > _UNIT_TOL)
        if lead.size and col[lead[0]] < 0.0:
            eigvecs[:, i] = -col
    radii = np.sqrt(eigvals)
    return Ellipsoid(core=sym, radii=radii,
                     axes=np.ascontiguousarray(eigvecs),
                     rank_tolerance=float(rank_tolerance))


def from_radii_axes(radii, axes,
                    rank_tolerance: float = DEFAULT_RANK_TOL) -> Ellipsoid:
    """Build an ellipsoid from given principal radii and orthonormal axes.

    Accepts any ordering; radii are sorted descending (stably, carrying
    their axis columns along).  The core is reconstructed exactly as
    V diag(r^2) V^T.
    """
    r = np.asarray(radii, dtype=np.float64)
    v = np.asarray(axes, dtype=np.float64)
    if r.ndim != 1:
        raise ValidationError("radii must be 1-d")
    m = r.shape[0]
    if not 1 <= m <= _MAX_DIM:
        raise ValidationError(f"dimension {m} outside supported range 1..{_MAX_DIM}")
    if v.shape != (m, m):
        raise ValidationError(f"axes must have shape ({m}, {m}), got {v.shape}")
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
        raise ValidationError("radii or axes have non-finite entries")
    if np.any(r < 0.0):
        raise ValidationError("radii must be non-negative")
    if float(np.abs(v.T @ v - np.eye(m)).max()) > _SYM_TOL:
        raise ValidationError("axes must form an orthonormal column set")
    if not 0.0 < rank_tolerance < 1.0:
        raise ValidationError("rank_tolerance must lie in (0, 1)")

    order = np.argsort(-r, kind="stable")
    r = np.ascontiguousarray(r[order])
    v = np.ascontiguousarray(v[:, order])
    core = (v * r**2) @ v.T
    return Ellipsoid(core=(core + core.T) / 2.0, radii=r, axes=v,
                     rank_tolerance=float(rank_tolerance))


def from_jacobian(jac, weight=None,
                  rank_tolerance: float = DEFAULT_RANK_TOL) -> Ellipsoid:
    """Ellipsoid of a Jacobian under an optional joint-space weight."""
    return from_core(core_matrix(jac, weight), rank_tolerance)


def radius_along(ell: Ellipsoid, direction) -> float:
    """Distance from the origin to the ellipsoid surface along a unit direction.

    Returns exactly 0.0 when the direction has any component along a
    zero-radius axis (the surface collapses there).
    """
    d = _check_direction(direction, ell.dim)
    radius, _, _ = _kernels.scan_metrics(
        ell.radii, ell.axes, ell.n_nonzero, d[None, :], ORTH_TOL)
    return float(radius[0])


def pseudo_radius_along(ell: Ellipsoid, direction) -> float:
    """Root-sum-square of projection lengths along a unit direction.

    Equals sqrt(nu^T core nu); finite for every direction, including
    those where the directional radius collapses to zero.
    """
    d = _check_direction(direction, ell.dim)
    _, pseudo, _ = _kernels.scan_metrics(
        ell.radii, ell.axes, ell.n_nonzero, d[None, :], ORTH_TOL)
    return float(pseudo[0])


def projection_lengths(ell: Ellipsoid, direction) -> np.ndarray:
    """Per-axis projection lengths |r_i * (v_i . nu)|, in axis order."""
    d = _check_direction(direction, ell.dim)
    return np.abs(ell.radii * (ell.axes.T @ d))


def scan_directions(ell: Ellipsoid, directions):
    """Vectorized metrics over (k, dim) unit direction rows.

    Returns (radius, pseudo, zero_flags) arrays of length k; radius is
    exactly 0.0 where zero_flags marks a collapsed direction.
    """
    dirs = np.asarray(directions, dtype=np.float64)
    if dirs.ndim != 2 or dirs.shape[1] != ell.dim:
        raise ValidationError(
            f"directions must have shape (k, {ell.dim}), got {dirs.shape}"
        )
    if not np.all(np.isfinite(dirs)):
        raise ValidationError("directions have non-finite entries")
    norms = np.linalg.norm(dirs, axis=1)
    if float(np.abs(norms - 1.0).max(initial=0.0)) > 1e-9:
        raise ValidationError("directions must be unit vectors")
    return _kernels.scan_metrics(
        ell.radii, ell.axes, ell.n_nonzero, dirs, ORTH_TOL)


def metric_report(ell: Ellipsoid, direction) -> dict:
    """JSON-ready summary: keys r, l, radii, axes, rank_deficient.

    axes serializes as a list of principal-axis unit vectors (the columns
    of ell.axes), matching radii order.
    """
    d = _check_direction(direction, ell.dim)
    radius, pseudo, _ = _kernels.scan_metrics(
        ell.radii, ell.axes, ell.n_nonzero, d[None, :], ORTH_TOL)
    return {
        "r": float(radius[0]),
        "l": float(pseudo[0]),
        "radii": [float(x) for x in ell.radii],
        "axes": [[float(x) for x in ell.axes[:, i]] for i in range(ell.dim)],
        "rank_deficient": bool(ell.rank_deficient),
    }


@dataclass(frozen=True)
class Mesh:
    """Sampled surface: (N, dim) vertices plus (F, 3) triangle indices.

    2-d surfaces are closed polylines (faces empty, vertices in loop
    order); 3-d surfaces are latitude-longitude triangulations.
    """

    vertices: np.ndarray
    faces: np.ndarray = field(default_factory=lambda: np.empty((0, 3), dtype=np.int64))

    def __post_init__(self):
        self.vertices.flags.writeable = False
        self.faces.flags.writeable = False


def ellipsoid_mesh(ell: Ellipsoid, pseudo: bool = False,
                   samples: int = 64) -> Mesh:
    """Sample the ellipsoid surface (or the pseudo-radius surface).

    For dim 2 this returns a closed polyline of `samples` boundary points
    at evenly spaced angles.  For dim 3 it returns a lat-lon grid with
    `samples` latitude rows (poles included) and 2*samples longitude
    columns, triangulated.  Each vertex is metric(nu) * nu.
    """
    if not isinstance(samples, int) or isinstance(samples, bool):
        raise ValidationError("samples must be an integer")
    if samples < 16:
        raise ValidationError(f"samples must be at least 16, got {samples}")
    if ell.dim == 2:
        t = 2.0 * np.pi * np.arange(samples) / samples
        dirs = np.column_stack([np.cos(t), np.sin(t)])
    elif ell.dim == 3:
        n_v, n_u = samples, 2 * samples
        phi = np.pi * np.arange(n_v) / (n_v - 1)
        theta = 2.0 * np.pi * np.arange(n_u) / n_u
        sin_phi = np.sin(phi)[:, None]
        dirs = np.empty((n_v * n_u, 3))
        dirs[:, 0] = (sin_phi * np.cos(theta)[None, :]).ravel()
        dirs[:, 1] = (sin_phi * np.sin(theta)[None, :]).ravel()
        dirs[:, 2] = np.broadcast_to(np.cos(phi)[:, None], (n_v, n_u)).ravel()
    else:
        raise ValidationError(f"meshing supports dim 2 and 3, got {ell.dim}")
    # re-normalize: trig round-off can leave norms a hair off 1
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    radius, pseudo_r, _ = _kernels.scan_metrics(
        ell.radii, ell.axes, ell.n_nonzero, dirs, ORTH_TOL)
    rho = pseudo_r if pseudo else radius
    vertices = dirs * rho[:, None]

    if ell.dim == 2:
        return Mesh(vertices=vertices)

    faces = []
    for v in range(n_v - 1):
        for u in range(n_u):
            a = v * n_u + u
            b = (v + 1) * n_u + u
            c = (v + 1) * n_u + (u + 1) % n_u
            d = v * n_u + (u + 1) % n_u
            if v > 0:
                faces.append((a, c, d))
            if v < n_v - 2:
                faces.append((a, b, c))
    return Mesh(vertices=vertices, faces=np.array(faces, dtype=np.int64))


def write_mesh_obj(mesh: Mesh, path) -> None:
    """Write a 3-d mesh as a Wavefront OBJ file (1-indexed faces)."""
    if mesh.vertices.shape[1] != 3:
        raise ValidationError("OBJ output requires 3-d vertices")
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in mesh.vertices:
            fh.write(f"v {float(x)!r} {float(y)!r} {float(z)!r}\n")
        for a, b, c in mesh.faces:
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")


def write_polyline_csv(mesh: Mesh, path) -> None:
    """Write a 2-d boundary polyline as CSV with header x,y."""
    if mesh.vertices.shape[1] != 2:
        raise ValidationError("polyline output requires 2-d vertices")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,y\n")
        for x, y in mesh.vertices:
            fh.write(f"{float(x)!r},{float(y)!r}\n")
