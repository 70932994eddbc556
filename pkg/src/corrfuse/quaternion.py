"""
Quaternion helpers shared by every estimator.

Conventions:
    * Quaternions are numpy arrays in scalar-first order ``[w, x, y, z]``
    * Products are Hamilton products
    * The filter state ``q`` describes the sensor attitude; ``quat_to_matrix(q)``
      is the usual active rotation matrix (sensor axes expressed in the earth
      frame), so earth-frame vectors are brought into the sensor frame with its
      transpose, i.e. ``q* (x) v (x) q``
    * Euler angles are intrinsic Z-Y-X (yaw, pitch, roll)
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import NonOrthonormalInput

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

GIMBAL_LOCK_TOL = 1e-6


def normalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q)


def hamilton(p, q):
    """Raw Hamilton product, no renormalization (works for pure quaternions)."""
    w1, x1, y1, z1 = p
    w2, x2, y2, z2 = q
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_multiply(p, q):
    """Hamilton product ``p (x) q`` of two unit quaternions, renormalized."""
    return normalize(hamilton(p, q))


def quat_conjugate(q):
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_to_matrix(q):
    w, x, y, z = q
    return np.array([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])


def earth_to_sensor(q, v):
    """Express the earth-frame vector ``v`` in the sensor frame of attitude ``q``.

    Equivalent to the vector part of ``q* (x) [0, v] (x) q``. Accepts a single
    quaternion ``(4,)`` or a batch ``(N, 4)`` with ``v`` of shape ``(3,)`` or
    ``(N, 3)``.
    """
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    if q.ndim == 1:
        return quat_to_matrix(q).T @ v
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    vx, vy, vz = (v[..., 0], v[..., 1], v[..., 2])
    # rows of R(q)^T are the columns of R(q)
    out = np.empty((q.shape[0], 3))
    out[:, 0] = (1 - 2 * (y * y + z * z)) * vx + 2 * (x * y + w * z) * vy + 2 * (x * z - w * y) * vz
    out[:, 1] = 2 * (x * y - w * z) * vx + (1 - 2 * (x * x + z * z)) * vy + 2 * (y * z + w * x) * vz
    out[:, 2] = 2 * (x * z + w * y) * vx + 2 * (y * z - w * x) * vy + (1 - 2 * (x * x + y * y)) * vz
    return out


def matrix_to_quat(R):
    """Inverse of :func:`quat_to_matrix`, returned with ``w >= 0``.

    Uses Shepperd's branch selection so the result stays accurate for
    rotations near 180 degrees.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise NonOrthonormalInput(f"expected a 3x3 matrix, got shape {R.shape}")
    dev = np.linalg.norm(R.T @ R - np.eye(3))
    if not np.isfinite(dev) or dev > 1e-3 or np.linalg.det(R) < 0:
        raise NonOrthonormalInput(f"matrix is not a rotation (|R^T R - I|_F = {dev:.3g})")

    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > max(R[0, 0], R[1, 1], R[2, 2]):
        s = 2.0 * math.sqrt(1.0 + tr)
        q = [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
    elif R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
        s = 2.0 * math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
    elif R[1, 1] >= R[2, 2]:
        s = 2.0 * math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q = [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
    else:
        s = 2.0 * math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q = [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
    q = normalize(q)
    return q if q[0] >= 0 else -q


class EulerAngles(NamedTuple):
    yaw: float
    pitch: float
    roll: float
    gimbal_lock: bool = False


def quat_to_euler(q) -> EulerAngles:
    """Intrinsic Z-Y-X angles in radians.

    At gimbal lock (``|pitch|`` within 1e-6 of pi/2) only ``yaw - roll`` (or
    ``yaw + roll``) is defined; roll is then reported as 0 and the flag set.
    """
    R = quat_to_matrix(q)
    s = -R[2, 0]
    s = 1.0 if s > 1.0 else (-1.0 if s < -1.0 else s)
    pitch = math.asin(s)
    if abs(abs(pitch) - math.pi / 2) < GIMBAL_LOCK_TOL:
        yaw = math.atan2(-R[0, 1], R[1, 1])
        return EulerAngles(_wrap_pi(yaw), pitch, 0.0, True)
    yaw = math.atan2(R[1, 0], R[0, 0])
    roll = math.atan2(R[2, 1], R[2, 2])
    return EulerAngles(_wrap_pi(yaw), pitch, _wrap_pi(roll), False)


def quats_to_euler(qs):
    """Vectorized Z-Y-X angles for an ``(N, 4)`` array, columns yaw, pitch, roll.

    Gimbal-lock rows follow the same roll = 0 rule as :func:`quat_to_euler`.
    """
    qs = np.asarray(qs, dtype=float)
    w, x, y, z = qs[:, 0], qs[:, 1], qs[:, 2], qs[:, 3]
    r00 = 1 - 2 * (y * y + z * z)
    r10 = 2 * (x * y + w * z)
    r20 = 2 * (x * z - w * y)
    r21 = 2 * (y * z + w * x)
    r22 = 1 - 2 * (x * x + y * y)
    r01 = 2 * (x * y - w * z)
    r11 = 1 - 2 * (x * x + z * z)
    pitch = np.arcsin(np.clip(-r20, -1.0, 1.0))
    yaw = np.arctan2(r10, r00)
    roll = np.arctan2(r21, r22)
    locked = np.abs(np.abs(pitch) - np.pi / 2) < GIMBAL_LOCK_TOL
    if locked.any():
        yaw = np.where(locked, np.arctan2(-r01, r11), yaw)
        roll = np.where(locked, 0.0, roll)
    return np.column_stack([yaw, pitch, roll])


def euler_to_quat(yaw, pitch, roll):
    cy, sy = math.cos(yaw / 2), math.sin(yaw / 2)
    cp, sp = math.cos(pitch / 2), math.sin(pitch / 2)
    cr, sr = math.cos(roll / 2), math.sin(roll / 2)
    return np.array([
        cy * cp * cr + sy * sp * sr,
        cy * cp * sr - sy * sp * cr,
        cy * sp * cr + sy * cp * sr,
        sy * cp * cr - cy * sp * sr,
    ])


def axis_angle_quat(angle, axis):
    """Rotation of ``angle`` radians about ``axis`` (normalized here)."""
    axis = np.asarray(axis, dtype=float)
    n = float(np.linalg.norm(axis))
    if n == 0.0:
        raise ValueError("rotation axis must be nonzero")
    h = 0.5 * angle
    s = math.sin(h) / n
    return np.array([math.cos(h), s * axis[0], s * axis[1], s * axis[2]])


def rotvec_to_quat(rv):
    """Exponential map of a rotation vector (angle times axis)."""
    rv = np.asarray(rv, dtype=float)
    angle = float(np.linalg.norm(rv))
    if angle < 1e-12:
        return normalize([1.0, 0.5 * rv[0], 0.5 * rv[1], 0.5 * rv[2]])
    return axis_angle_quat(angle, rv / angle)


def rotation_angle(p, q):
    """Geodesic angle (radians) between two attitudes; sign-invariant."""
    d = abs(float(np.dot(p, q)))
    return 2.0 * math.acos(min(1.0, d))


def quat_equal(p, q, tol=1e-9):
    """True when ``p`` and ``q`` describe the same rotation (``q ~ -q``)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return bool(min(np.max(np.abs(p - q)), np.max(np.abs(p + q))) <= tol)


def canonical(q):
    """Return the representative with ``w >= 0``; for comparisons only."""
    q = np.asarray(q, dtype=float)
    return -q if q[0] < 0 else q


def random_quaternions(n, rng):
    """Uniformly distributed unit quaternions, shape ``(n, 4)``."""
    q = rng.standard_normal((n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def _wrap_pi(a):
    # keep the half-open interval (-pi, pi]
    if a <= -math.pi:
        a += 2 * math.pi
    return a
