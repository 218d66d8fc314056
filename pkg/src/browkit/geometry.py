"""Point-to-line distances, rotations, derotation, and rigid pose estimation.

Euler convention everywhere: R = Rz(roll) @ Ry(yaw) @ Rx(pitch), right-handed,
radians (the order OpenFace uses for its pose angles). Decomposition uses the
standard atan2 branches; angles near |yaw| = pi/2 (gimbal) are outside the
contract, as no face tracker produces them.

The eyebrow measure is the perpendicular distance from each brow point to the
infinite 3D line through the two inner eye corners. Unsigned by default; the
signed variant orients "up" along the perpendicular component of the upper
nose point relative to the eye line, so brows above the eye line come out
positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateGeometryError, SchemaError
from .landmark_io import HeadPose, LandmarkFrame

LINE_EPS = 1e-9

DEFAULT_RIGID_ROLES = ("inner_eye_L", "inner_eye_R", "upper_nose")


@dataclass(frozen=True)
class BrowMeasures:
    """Per-frame brow-to-eye-line distances, left/right and side means."""

    inner_L: float
    inner_R: float
    outer_L: float
    outer_R: float
    inner_mean: float
    outer_mean: float


def point_to_line_distance(p, a, b, signed_up: np.ndarray | None = None) -> float:
    """Perpendicular distance from p to the infinite line through a and b.

    With ``signed_up`` (a non-null vector), the magnitude is signed by the
    side of the line p falls on: positive when p's perpendicular offset points
    along ``signed_up``.
    """
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    d = b - a
    norm_d = np.linalg.norm(d)
    if norm_d <= LINE_EPS:
        raise DegenerateGeometryError(
            f"line endpoints coincide (|b-a| = {norm_d:.3e} <= {LINE_EPS})"
        )
    dist = float(np.linalg.norm(np.cross(p - a, d)) / norm_d)
    if signed_up is None:
        return dist
    u = d / norm_d
    offset = (p - a) - np.dot(p - a, u) * u
    return dist if np.dot(offset, signed_up) >= 0 else -dist


def _eye_line_up(a: np.ndarray, b: np.ndarray, nose: np.ndarray) -> np.ndarray:
    """Perpendicular direction from the eye-line midpoint toward the upper nose point."""
    u = (b - a) / np.linalg.norm(b - a)
    w = nose - (a + b) / 2
    up = w - np.dot(w, u) * u
    n = np.linalg.norm(up)
    if n <= LINE_EPS:
        raise DegenerateGeometryError("upper nose point lies on the eye line; no up direction")
    return up / n


def brow_measures(
    frame: LandmarkFrame, signed: bool = False, drop_z: bool = False
) -> BrowMeasures | None:
    """Distances from the four brow points to the inner-eye line.

    Returns None for dropout frames (never zero). ``drop_z`` projects all
    points to the image plane first, for checking how much the z channel
    contributes.
    """
    if not frame.present:
        return None
    pts = {}
    for role in ("inner_brow_L", "inner_brow_R", "outer_brow_L", "outer_brow_R",
                 "inner_eye_L", "inner_eye_R", "upper_nose"):
        p = frame.points.get(role)
        if p is None:
            raise SchemaError(f"frame {frame.frame_index}: role {role!r} unresolved")
        pts[role] = p * np.array([1.0, 1.0, 0.0]) if drop_z else p

    a, b = pts["inner_eye_L"], pts["inner_eye_R"]
    up = _eye_line_up(a, b, pts["upper_nose"]) if signed else None
    d = {
        side: point_to_line_distance(pts[side], a, b, signed_up=up)
        for side in ("inner_brow_L", "inner_brow_R", "outer_brow_L", "outer_brow_R")
    }
    return BrowMeasures(
        inner_L=d["inner_brow_L"],
        inner_R=d["inner_brow_R"],
        outer_L=d["outer_brow_L"],
        outer_R=d["outer_brow_R"],
        inner_mean=(d["inner_brow_L"] + d["inner_brow_R"]) / 2,
        outer_mean=(d["outer_brow_L"] + d["outer_brow_R"]) / 2,
    )


def euler_to_matrix(pose: HeadPose) -> np.ndarray:
    """Rotation matrix Rz(roll) @ Ry(yaw) @ Rx(pitch)."""
    cp, sp = math.cos(pose.pitch), math.sin(pose.pitch)
    cy, sy = math.cos(pose.yaw), math.sin(pose.yaw)
    cr, sr = math.cos(pose.roll), math.sin(pose.roll)
    rx = np.array([[1, 0, 0], [0, cp, -sp], [0, sp, cp]], dtype=float)
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]], dtype=float)
    rz = np.array([[cr, -sr, 0], [sr, cr, 0], [0, 0, 1]], dtype=float)
    return rz @ ry @ rx


def matrix_to_euler(rot: np.ndarray) -> HeadPose:
    """Euler angles (pitch, yaw, roll) such that euler_to_matrix reproduces ``rot``."""
    rot = np.asarray(rot, dtype=float)
    sy = -rot[2, 0]
    if abs(sy) < 1.0 - 1e-12:
        yaw = math.asin(sy)
        pitch = math.atan2(rot[2, 1], rot[2, 2])
        roll = math.atan2(rot[1, 0], rot[0, 0])
    else:
        # Gimbal: pitch and roll are coupled; put everything in pitch.
        yaw = math.copysign(math.pi / 2, sy)
        pitch = math.atan2(-rot[0, 1], rot[1, 1])
        roll = 0.0
    return HeadPose(pitch=pitch, yaw=yaw, roll=roll)


def derotate_and_center(frame: LandmarkFrame, pose: HeadPose) -> LandmarkFrame | None:
    """Revert a head rotation and move the upper nose point to the origin.

    Every point p becomes R^T (p - upper_nose). Returns None for dropout
    frames. Raw indexed points are transformed alongside role points so the
    result can still be serialized.
    """
    if not frame.present:
        return None
    nose = frame.points.get("upper_nose")
    if nose is None:
        raise SchemaError(f"frame {frame.frame_index}: upper_nose unresolved")
    rt = euler_to_matrix(pose).T
    return replace(
        frame,
        raw={i: rt @ (p - nose) for i, p in frame.raw.items()},
        points={r: rt @ (p - nose) for r, p in frame.points.items()},
        pose=HeadPose(0.0, 0.0, 0.0),
    )


def estimate_pose_rigid(
    frame: LandmarkFrame,
    reference: LandmarkFrame,
    rigid_roles: tuple[str, ...] = DEFAULT_RIGID_ROLES,
) -> HeadPose:
    """Head pose of ``frame`` relative to ``reference`` by orthogonal Procrustes.

    Finds the least-squares rotation (reflections excluded) carrying the
    centered reference points onto the centered frame points, then decomposes
    it with matrix_to_euler. Translation cancels in the centering, so a pure
    shift estimates as zero rotation.
    """
    if not frame.present or not reference.present:
        raise DegenerateGeometryError("pose estimation needs two present frames")
    if len(rigid_roles) < 3:
        raise DegenerateGeometryError(f"need >= 3 rigid roles, got {len(rigid_roles)}")
    try:
        ref = np.array([reference.points[r] for r in rigid_roles], dtype=float)
        cur = np.array([frame.points[r] for r in rigid_roles], dtype=float)
    except KeyError as exc:
        raise SchemaError(f"rigid role {exc.args[0]!r} unresolved") from None

    ref_c = ref - ref.mean(axis=0)
    cur_c = cur - cur.mean(axis=0)
    h = ref_c.T @ cur_c
    u, s, vt = np.linalg.svd(h)
    # Collinear point sets leave the rotation about the line undetermined.
    if s[1] <= 1e-9 * max(s[0], 1e-30):
        raise DegenerateGeometryError("rigid point set is collinear or degenerate")
    v = vt.T
    d = np.sign(np.linalg.det(v @ u.T))
    rot = v @ np.diag([1.0, 1.0, d]) @ u.T
    return matrix_to_euler(rot)
