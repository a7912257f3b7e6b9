"""Synthetic noisy-keypoint experiment for the reduced arm model.

The experiment mimics planning a short straight hand path from a pose
observed through noisy keypoints.  For each start configuration and each
horizontal clock direction it repeatedly:

1. perturbs the shoulder/elbow/wrist keypoints with iid Gaussian noise,
2. re-estimates the joint configuration from the noisy keypoints,
3. predicts the required joint motion from each metric on the estimated
   ellipsoid (displacement divided by metric), and
4. scores both predictions against ground truth from a damped
   least-squares inverse-kinematics integration at the true pose.

Near ill-conditioned poses the radius-based prediction degrades sharply
under estimation noise while the pseudo-radius prediction stays bounded.
The summary quantifies that gap per configuration with bootstrap
confidence intervals.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from pseudoell.chain import KinematicChain
from pseudoell.ellipsoid import (
    from_jacobian,
    pseudo_radius_along,
    radius_along,
)
from pseudoell.errors import PathInfeasibleError, ValidationError

# fixed second word of the bootstrap seed sequence, keeps resampling
# independent of the per-draw noise streams
_BOOTSTRAP_SEED_TAG = 999331

_MAX_STEP_NORM = 0.5
_TRACK_TOL = 1e-10
_POLISH_ITERS = 50


@dataclass(frozen=True)
class KeypointFrame:
    """Shoulder, elbow, and wrist positions in the torso frame (meters)."""

    shoulder: np.ndarray
    elbow: np.ndarray
    wrist: np.ndarray

    def __post_init__(self):
        for name in ("shoulder", "elbow", "wrist"):
            p = getattr(self, name)
            if p.shape != (3,) or not np.all(np.isfinite(p)):
                raise ValidationError(f"{name} must be a finite 3-vector")
            p.flags.writeable = False


@dataclass(frozen=True)
class NoiseModel:
    """Isotropic Gaussian keypoint noise: sigma in meters, plus a seed.

    Each trial draws its own generator from the seed sequence
    [seed, config_id, direction_index, draw], so any single trial can be
    reproduced without replaying the ones before it.
    """

    sigma: float = 0.010
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0.0):
            raise ValidationError(f"sigma must be non-negative, got {self.sigma}")

    def perturb(self, frame: KeypointFrame,
                rng: np.random.Generator) -> KeypointFrame:
        """Add iid noise to each keypoint, drawn shoulder, elbow, wrist."""
        return KeypointFrame(
            shoulder=frame.shoulder + rng.normal(0.0, self.sigma, 3),
            elbow=frame.elbow + rng.normal(0.0, self.sigma, 3),
            wrist=frame.wrist + rng.normal(0.0, self.sigma, 3),
        )


def clock_directions() -> np.ndarray:
    """Seven horizontal unit directions at clock hours 3 through 9.

    Row i (0-based) is hour i+3; hour h sits at angle (6-h)*30 degrees
    from +x, so hour 6 points forward (+x), hour 3 points along +y, and
    hour 9 along -y.
    """
    hours = np.arange(3, 10)
    alpha = np.radians((6 - hours) * 30.0)
    return np.column_stack(
        [np.cos(alpha), np.sin(alpha), np.zeros(alpha.shape[0])]
    )


def standard_start_configs() -> list[np.ndarray]:
    """Two study poses for the reduced arm, both with a right-angle elbow.

    The first raises the upper arm until the wrist sits a few millimeters
    off the shoulder-rotation axis, so the first joint barely moves the
    hand and the directional radius collapses for lateral directions; the
    second lowers the arm into a well-conditioned pose.  Strongly extended
    elbows are deliberately avoided: from those poses a 10 cm straight
    horizontal path exits the reachable workspace for some clock hours.
    """
    return [
        np.array([0.3, 0.8, math.pi / 2]),
        np.array([0.3, 0.5, math.pi / 2]),
    ]


def _require_arm(chain: KinematicChain) -> None:
    if chain.n_joints != 3 or chain.task_dim != 3:
        raise ValidationError(
            "keypoint mapping requires the 3-joint spatial arm model"
        )


def keypoints_from_config(chain: KinematicChain, config) -> KeypointFrame:
    """Shoulder/elbow/wrist keypoints of the reduced arm at a configuration."""
    _require_arm(chain)
    frames = chain.forward_kinematics(config)
    return KeypointFrame(shoulder=frames[0].copy(), elbow=frames[2].copy(),
                         wrist=frames[3].copy())


def estimate_config(frame: KeypointFrame, chain: KinematicChain) -> np.ndarray:
    """Invert the keypoint map: joint angles from one keypoint frame.

    The upper-arm direction u fixes the shoulder angles (flexion from
    its forward component, abduction from the remaining plane); the
    elbow angle is the angle between the upper-arm and forearm
    directions, zero when extended.  When the upper arm aligns with the
    first rotation axis (|u_x| > 1 - 1e-9) the abduction angle is
    unobservable and reported as 0 by convention.  Only segment
    directions are used, so noisy lengths do not bias the estimate.
    """
    _require_arm(chain)
    u = frame.elbow - frame.shoulder
    f = frame.wrist - frame.elbow
    u_len = float(np.linalg.norm(u))
    f_len = float(np.linalg.norm(f))
    if u_len <= 1e-6 or f_len <= 1e-6:
        raise ValidationError("degenerate keypoints: a segment has near-zero length")
    u_hat = u / u_len
    f_hat = f / f_len

    lateral = math.hypot(u_hat[1], u_hat[2])
    q2 = math.atan2(u_hat[0], lateral)
    q1 = 0.0 if abs(u_hat[0]) > 1.0 - 1e-9 else math.atan2(u_hat[1], -u_hat[2])
    q3 = math.acos(min(1.0, max(-1.0, float(u_hat @ f_hat))))
    return np.array([q1, q2, q3])


def _dls_step(jac: np.ndarray, err: np.ndarray, damping: float) -> np.ndarray:
    m = jac.shape[0]
    return jac.T @ np.linalg.solve(jac @ jac.T + damping * np.eye(m), err)


def ground_truth_joint_motion(chain: KinematicChain, q_start, direction,
                              displacement: float, steps: int = 100,
                              damping: float = 1e-6) -> float:
    """Joint-space norm of the motion realizing a straight task-space path.

    Tracks evenly spaced waypoints from the start position along the unit
    direction with damped least-squares steps, then polishes the final
    waypoint to sub-nanometer residual.  Raises PathInfeasibleError when
    a single correction step exceeds 0.5 rad or the endpoint cannot be
    reached.  Returns ||q_end - q_start||; a zero displacement returns 0.
    """
    q0 = chain.check_config(q_start)
    q = q0.copy()
    d = np.asarray(direction, dtype=np.float64)
    if d.shape != (chain.task_dim,):
        raise ValidationError(
            f"direction must have shape ({chain.task_dim},), got {d.shape}"
        )
    norm = float(np.linalg.norm(d))
    if abs(norm - 1.0) > 1e-9:
        raise ValidationError("direction must be a unit vector")
    if not (math.isfinite(displacement) and displacement >= 0.0):
        raise ValidationError(f"displacement must be non-negative, got {displacement}")
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 10:
        raise ValidationError(f"steps must be an integer of at least 10, got {steps}")
    if not (math.isfinite(damping) and damping > 0.0):
        raise ValidationError(f"damping must be positive, got {damping}")
    if displacement == 0.0:
        return 0.0

    td = chain.task_dim
    p0 = chain.end_point(q)[:td]

    def advance(target: np.ndarray) -> np.ndarray:
        err = target - chain.end_point(q)[:td]
        dq = _dls_step(chain.jacobian(q), err, damping)
        if float(np.linalg.norm(dq)) > _MAX_STEP_NORM:
            raise PathInfeasibleError(
                "path requires a joint step above 0.5 rad; treating as infeasible"
            )
        return q + dq

    for k in range(1, steps + 1):
        target = p0 + (k / steps) * displacement * d
        q = advance(target)
    target = p0 + displacement * d
    for _ in range(_POLISH_ITERS):
        if float(np.linalg.norm(target - chain.end_point(q)[:td])) <= _TRACK_TOL:
            break
        q = advance(target)
    else:
        raise PathInfeasibleError("endpoint correction failed to converge")
    return float(np.linalg.norm(q - q0))


@dataclass(frozen=True)
class ExperimentTrial:
    """One noisy draw: the estimate and both joint-motion predictions.

    delta_r and delta_l are the predicted joint-motion magnitudes
    displacement / r and displacement / l (radians), with r and l taken
    on the ellipsoid of the estimated configuration along nu.  A
    collapsed radius gives delta_r = +inf (counted separately in the
    summary).  dq_norm_true is the inverse-kinematics ground truth at
    the true configuration.
    """

    config_id: int
    direction_index: int
    draw: int
    nu: np.ndarray
    q_true: np.ndarray
    q_est: np.ndarray
    delta_r: float
    delta_l: float
    dq_norm_true: float
    displacement: float

    @property
    def abs_error_r(self) -> float:
        """|delta_r - dq_norm_true|, +inf when the prediction collapsed."""
        return abs(self.delta_r - self.dq_norm_true)

    @property
    def abs_error_l(self) -> float:
        return abs(self.delta_l - self.dq_norm_true)


@dataclass(frozen=True)
class ExperimentSummary:
    """Prediction-error statistics, per configuration and pooled.

    Each per_config row carries the mean absolute prediction errors of
    both metrics in degrees (finite trials only; collapsed predictions
    are tallied in n_infinite_*) and gap_deg, the mean error of the
    pseudo-radius prediction minus that of the radius prediction, with
    a 99% bootstrap confidence interval.  A negative gap with a
    negative upper bound says the pseudo radius predicted joint motion
    more accurately at that configuration.
    """

    n_trials: int
    n_infinite_r: int
    n_infinite_l: int
    mean_abs_err_r_deg: float
    mean_abs_err_l_deg: float
    gap_deg: float
    gap_ci99_deg: tuple[float, float]
    per_config: tuple[dict, ...]
    displacement: float
    sigma: float
    n_bootstrap: int
    seed: int


def _finite_mean(values: np.ndarray) -> float:
    finite = values[np.isfinite(values)]
    return float(finite.mean()) if finite.size else math.inf


def _bootstrap_gap_ci(err_r: np.ndarray, err_l: np.ndarray, seed_words,
                      n_bootstrap: int) -> tuple[float, float]:
    """Percentile CI for mean(err_l) - mean(err_r), finite entries only."""
    n = err_r.shape[0]
    rng = np.random.default_rng(seed_words)
    gaps = np.empty(n_bootstrap)
    pos = 0
    # resample in blocks: keeps the index matrix around 10 MB
    block = max(1, min(n_bootstrap, 8_000_000 // max(n, 1)))

    def finite_row_means(err: np.ndarray, idx: np.ndarray) -> np.ndarray:
        rs = err[idx]
        finite = np.isfinite(rs)
        counts = np.maximum(finite.sum(axis=1), 1)
        return np.where(finite, rs, 0.0).sum(axis=1) / counts

    while pos < n_bootstrap:
        cur = min(block, n_bootstrap - pos)
        idx = rng.integers(0, n, size=(cur, n))
        gaps[pos:pos + cur] = (finite_row_means(err_l, idx)
                               - finite_row_means(err_r, idx))
        pos += cur
    lo, hi = np.percentile(gaps, [0.5, 99.5])
    return float(lo), float(hi)


def _error_stats(trials, config_id, q_true, seed, n_bootstrap) -> dict:
    err_r = np.array([t.abs_error_r for t in trials])
    err_l = np.array([t.abs_error_l for t in trials])
    mean_r = _finite_mean(err_r)
    mean_l = _finite_mean(err_l)
    lo, hi = _bootstrap_gap_ci(
        err_r, err_l, [seed, _BOOTSTRAP_SEED_TAG, config_id], n_bootstrap)
    row = {
        "config_id": config_id,
        "n_trials": int(err_r.shape[0]),
        "n_infinite_r": int(np.sum(~np.isfinite(err_r))),
        "n_infinite_l": int(np.sum(~np.isfinite(err_l))),
        "mean_abs_err_r_deg": math.degrees(mean_r),
        "mean_abs_err_l_deg": math.degrees(mean_l),
        "gap_deg": math.degrees(mean_l - mean_r),
        "gap_ci99_deg": [math.degrees(lo), math.degrees(hi)],
    }
    if q_true is not None:
        row["q_true"] = [float(x) for x in q_true]
    return row


def run_trials(chain: KinematicChain, start_configs=None,
               noise: NoiseModel = NoiseModel(), displacement: float = 0.1,
               n_draws: int = 1000, steps: int = 100,
               n_bootstrap: int = 2000):
    """Run the full noisy-keypoint study; returns (trials, summary).

    For every start configuration (1-based config_id) and clock
    direction (1-based direction_index, hour = index + 2) the ground
    truth joint motion is integrated once, then n_draws noisy keypoint
    frames are scored against it.  Draw numbering is 1-based and each
    trial re-derives its generator from [seed, config, direction, draw],
    so results do not depend on evaluation order.
    """
    _require_arm(chain)
    if start_configs is None:
        start_configs = standard_start_configs()
    start_configs = [chain.check_config(q) for q in start_configs]
    if not start_configs:
        raise ValidationError("at least one start configuration is required")
    if not (math.isfinite(displacement) and displacement > 0.0):
        raise ValidationError(f"displacement must be positive, got {displacement}")
    if not isinstance(n_draws, int) or isinstance(n_draws, bool) or n_draws < 1:
        raise ValidationError(f"n_draws must be a positive integer, got {n_draws}")
    if (not isinstance(n_bootstrap, int) or isinstance(n_bootstrap, bool)
            or n_bootstrap < 100):
        raise ValidationError(
            f"n_bootstrap must be an integer of at least 100, got {n_bootstrap}"
        )

    dirs = clock_directions()
    trials: list[ExperimentTrial] = []
    per_config_rows: list[dict] = []

    for ci, q_true in enumerate(start_configs, start=1):
        frame = keypoints_from_config(chain, q_true)
        cfg_start = len(trials)
        for di in range(1, dirs.shape[0] + 1):
            nu = dirs[di - 1]
            dq_true = ground_truth_joint_motion(
                chain, q_true, nu, displacement, steps)
            for draw in range(1, n_draws + 1):
                rng = np.random.default_rng([noise.seed, ci, di, draw])
                q_est = estimate_config(noise.perturb(frame, rng), chain)
                ell = from_jacobian(chain.jacobian(q_est))
                r_est = radius_along(ell, nu)
                l_est = pseudo_radius_along(ell, nu)
                trials.append(ExperimentTrial(
                    config_id=ci, direction_index=di, draw=draw,
                    nu=nu.copy(), q_true=q_true.copy(), q_est=q_est,
                    delta_r=displacement / r_est if r_est > 0.0 else math.inf,
                    delta_l=displacement / l_est if l_est > 0.0 else math.inf,
                    dq_norm_true=dq_true, displacement=displacement,
                ))
        per_config_rows.append(_error_stats(
            trials[cfg_start:], ci, q_true, noise.seed, n_bootstrap))

    pooled = _error_stats(trials, 0, None, noise.seed, n_bootstrap)
    summary = ExperimentSummary(
        n_trials=pooled["n_trials"],
        n_infinite_r=pooled["n_infinite_r"],
        n_infinite_l=pooled["n_infinite_l"],
        mean_abs_err_r_deg=pooled["mean_abs_err_r_deg"],
        mean_abs_err_l_deg=pooled["mean_abs_err_l_deg"],
        gap_deg=pooled["gap_deg"],
        gap_ci99_deg=tuple(pooled["gap_ci99_deg"]),
        per_config=tuple(per_config_rows),
        displacement=displacement,
        sigma=noise.sigma,
        n_bootstrap=n_bootstrap,
        seed=noise.seed,
    )
    return trials, summary


def write_trials_csv(trials, path) -> None:
    """Write trials as CSV rows config_id,dir_index,draw,delta_r_deg,delta_l_deg,dq_true_deg.

    delta columns are the predicted joint-motion magnitudes in degrees
    (inf marks a collapsed radius prediction).
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("config_id,dir_index,draw,delta_r_deg,delta_l_deg,dq_true_deg\n")
        for t in trials:
            fh.write(f"{t.config_id},{t.direction_index},{t.draw},"
                     f"{math.degrees(t.delta_r)!r},{math.degrees(t.delta_l)!r},"
                     f"{math.degrees(t.dq_norm_true)!r}\n")


def summary_as_dict(summary: ExperimentSummary) -> dict:
    return {
        "n_trials": summary.n_trials,
        "n_infinite_r": summary.n_infinite_r,
        "n_infinite_l": summary.n_infinite_l,
        "mean_abs_err_r_deg": summary.mean_abs_err_r_deg,
        "mean_abs_err_l_deg": summary.mean_abs_err_l_deg,
        "gap_deg": summary.gap_deg,
        "gap_ci99_deg": list(summary.gap_ci99_deg),
        "per_config": [dict(row) for row in summary.per_config],
        "displacement_m": summary.displacement,
        "sigma_m": summary.sigma,
        "n_bootstrap": summary.n_bootstrap,
        "seed": summary.seed,
    }


def write_summary_json(summary: ExperimentSummary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary_as_dict(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
