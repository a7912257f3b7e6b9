"""Serial revolute-joint chains: forward kinematics, geometric Jacobians, models.

Conventions
-----------
A chain is a list of revolute joints. Joint i is described in the frame of
joint i-1 (joint 0 in the world/base frame) by a translation ``offset`` and a
unit rotation ``axis``; the joint variable q_i rotates everything downstream
about that axis. The end-point sits at ``ee_offset`` in the last joint frame.

``task_dim`` selects the translational task space: 3 for spatial chains, 2
for planar chains (all joint axes parallel), in which case Jacobians are the
first two rows of the translational Jacobian.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationSizeError, ValidationError

_UNIT_TOL = 1e-12
_PARALLEL_TOL = 1e-9


def _vec3(value, name: str) -> np.ndarray:
    v = np.asarray(value, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise ValidationError(f"{name} must be a 3-vector")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} must be finite")
    v = v.copy()
    v.flags.writeable = False
    return v


def rotation_about(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation matrix about a unit axis (Rodrigues form)."""
    x, y, z = axis
    c = math.cos(angle)
    s = math.sin(angle)
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


@dataclass(frozen=True, eq=False)
class JointSpec:
    """One revolute joint, described in its parent joint frame."""

    axis: np.ndarray
    offset: np.ndarray
    lower_limit: float = -math.pi
    upper_limit: float = math.pi

    def __post_init__(self):
        axis = _vec3(self.axis, "axis")
        offset = _vec3(self.offset, "offset")
        if abs(float(np.linalg.norm(axis)) - 1.0) > _UNIT_TOL:
            raise ValidationError("joint axis must be a unit vector")
        if not self.lower_limit <= self.upper_limit:
            raise ValidationError("joint limits must satisfy lower <= upper")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "offset", offset)


@dataclass(frozen=True, eq=False)
class KinematicChain:
    """Ordered revolute joints plus a fixed end-point offset.

    Instances are immutable and safe to share across threads; all methods
    are pure functions of the configuration.
    """

    joints: tuple[JointSpec, ...]
    ee_offset: np.ndarray
    task_dim: int = 3

    def __post_init__(self):
        joints = tuple(self.joints)
        if len(joints) < 1:
            raise ValidationError("chain needs at least one joint")
        for j in joints:
            if not isinstance(j, JointSpec):
                raise ValidationError("joints must be JointSpec instances")
        ee = _vec3(self.ee_offset, "ee_offset")
        if self.task_dim not in (2, 3):
            raise ValidationError("task_dim must be 2 or 3")
        if self.task_dim == 2:
            a0 = joints[0].axis
            for j in joints[1:]:
                if np.linalg.norm(np.cross(a0, j.axis)) > _PARALLEL_TOL:
                    raise ValidationError(
                        "task_dim 2 requires all joint axes parallel"
                    )
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "ee_offset", ee)

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    def check_config(self, config) -> np.ndarray:
        q = np.asarray(config, dtype=float).reshape(-1)
        if q.shape != (self.n_joints,):
            raise ConfigurationSizeError(
                f"configuration has {q.shape[0]} entries, chain has "
                f"{self.n_joints} joints"
            )
        if not np.all(np.isfinite(q)):
            raise ValidationError("configuration must be finite")
        return q

    def forward_kinematics(self, config) -> np.ndarray:
        """Joint-frame origins and end-point position.

        Returns an (n_joints + 1, 3) array: row i is the origin of joint i,
        the last row is the end-point.
        """
        q = self.check_config(config)
        out = np.empty((self.n_joints + 1, 3))
        rot = np.eye(3)
        pos = np.zeros(3)
        for i, joint in enumerate(self.joints):
            pos = pos + rot @ joint.offset
            out[i] = pos
            rot = rot @ rotation_about(joint.axis, q[i])
        out[-1] = pos + rot @ self.ee_offset
        return out

    def end_point(self, config) -> np.ndarray:
        return self.forward_kinematics(config)[-1]

    def jacobian(self, config) -> np.ndarray:
        """Translational geometric Jacobian, truncated to task_dim rows.

        Column i is (world axis of joint i) x (end-point - joint i origin).
        """
        q = self.check_config(config)
        frames = self.forward_kinematics(q)
        ee = frames[-1]
        jac = np.empty((3, self.n_joints))
        rot = np.eye(3)
        for i, joint in enumerate(self.joints):
            world_axis = rot @ joint.axis
            jac[:, i] = np.cross(world_axis, ee - frames[i])
            rot = rot @ rotation_about(joint.axis, q[i])
        return jac[: self.task_dim].copy()

    def to_dict(self) -> dict:
        return {
            "task_dim": self.task_dim,
            "joints": [
                {
                    "axis": [float(x) for x in j.axis],
                    "offset": [float(x) for x in j.offset],
                    "limits": [float(j.lower_limit), float(j.upper_limit)],
                }
                for j in self.joints
            ],
            "ee_offset": [float(x) for x in self.ee_offset],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KinematicChain":
        try:
            joints = tuple(
                JointSpec(
                    axis=np.asarray(j["axis"], dtype=float),
                    offset=np.asarray(j["offset"], dtype=float),
                    lower_limit=float(j["limits"][0]),
                    upper_limit=float(j["limits"][1]),
                )
                for j in data["joints"]
            )
            return cls(
                joints=joints,
                ee_offset=np.asarray(data["ee_offset"], dtype=float),
                task_dim=int(data["task_dim"]),
            )
        except (KeyError, TypeError, IndexError) as exc:
            raise ValidationError(f"malformed chain description: {exc}") from exc


def save_chain(chain: KinematicChain, path) -> None:
    Path(path).write_text(json.dumps(chain.to_dict(), indent=2) + "\n")


def load_chain(path) -> KinematicChain:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"chain file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"chain file is not valid JSON: {exc}") from exc
    return KinematicChain.from_dict(data)


def planar_two_link(l1: float, l2: float) -> KinematicChain:
    """Planar 2-joint arm in the z = 0 plane, both axes +z."""
    if not (l1 > 0 and l2 > 0):
        raise ValidationError("link lengths must be positive")
    z = np.array([0.0, 0.0, 1.0])
    return KinematicChain(
        joints=(
            JointSpec(axis=z, offset=np.zeros(3)),
            JointSpec(axis=z, offset=np.array([l1, 0.0, 0.0])),
        ),
        ee_offset=np.array([l2, 0.0, 0.0]),
        task_dim=2,
    )


def reduced_arm_model(
    upper_arm_len: float = 0.30, forearm_len: float = 0.28
) -> KinematicChain:
    """3-joint right-arm model: shoulder abduction, shoulder flexion, elbow flexion.

    Torso frame: x forward, z up. Zero pose hangs the arm along -z with the
    elbow extended. Positive q1 (about +x) swings the arm toward +y, positive
    q2 (about -y) raises it toward +x (q2 = pi/2 points the arm forward), and
    positive q3 flexes the elbow toward the front of the upper arm. The elbow
    axis is the normal of the plane containing the upper arm and forearm.
    """
    if not (upper_arm_len > 0 and forearm_len > 0):
        raise ValidationError("segment lengths must be positive")
    return KinematicChain(
        joints=(
            JointSpec(
                axis=np.array([1.0, 0.0, 0.0]),
                offset=np.zeros(3),
                lower_limit=-math.pi,
                upper_limit=math.pi,
            ),
            JointSpec(
                axis=np.array([0.0, -1.0, 0.0]),
                offset=np.zeros(3),
                lower_limit=-math.pi / 2,
                upper_limit=math.pi / 2,
            ),
            JointSpec(
                axis=np.array([0.0, -1.0, 0.0]),
                offset=np.array([0.0, 0.0, -upper_arm_len]),
                lower_limit=0.0,
                upper_limit=math.pi,
            ),
        ),
        ee_offset=np.array([0.0, 0.0, -forearm_len]),
        task_dim=3,
    )
