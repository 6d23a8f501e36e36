"""Orientation algebra on plain numpy arrays.

Conventions used everywhere in this package:

* Quaternions are scalar-first ``[w, x, y, z]``, unit norm, and canonicalized
  to ``w >= 0`` (q and -q encode the same rotation; picking one half of the
  double cover keeps downstream encodings continuous).
* A quaternion ``q`` maps body-frame vectors into the world frame:
  ``v_world = R(q) @ v_body``.
* Euler angles are ``[roll, pitch, yaw]`` in radians, intrinsic Z-Y-X
  (yaw about z, then pitch about the new y, then roll about the new x),
  the common aerial-robotics convention: ``R = Rz(yaw) Ry(pitch) Rx(roll)``.
  Each angle is wrapped to ``(-pi, pi]``.
* The 6D rotation encoding is the first two columns of the rotation matrix,
  column-major: ``[R00, R10, R20, R01, R11, R21]``. It is continuous over
  SO(3) and decoded by Gram-Schmidt.

All functions accept arrays with arbitrary leading batch dimensions; the
trailing dimension carries the representation (4 for quaternions, 3 for
Euler/vectors, 6 for the two-column encoding). Everything is float64.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateInput

_EPS_NORM = 1e-6
_EPS_GIMBAL = 1e-6


def wrap_angle(theta):
    """Wrap angles to the half-open interval (-pi, pi]."""
    theta = np.asarray(theta, dtype=np.float64)
    wrapped = np.remainder(theta + np.pi, 2.0 * np.pi) - np.pi
    # remainder() lands exact multiples of 2pi-pi on -pi; the convention is +pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def quat_normalize(q):
    """Normalize to unit length and canonicalize the sign so w >= 0."""
    q = np.asarray(q, dtype=np.float64)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    q = q / n
    sign = np.where(q[..., :1] < 0.0, -1.0, 1.0)
    return q * sign


def quat_multiply(q1, q2):
    """Hamilton product q1 * q2 (apply q2 first, then q1)."""
    q1 = np.asarray(q1, dtype=np.float64)
    q2 = np.asarray(q2, dtype=np.float64)
    w1, x1, y1, z1 = (q1[..., i] for i in range(4))
    w2, x2, y2, z2 = (q2[..., i] for i in range(4))
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def quat_conjugate(q):
    q = np.asarray(q, dtype=np.float64)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_rotate(q, v):
    """Rotate vectors v by q (body -> world for an attitude quaternion)."""
    q = np.asarray(q, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    u = q[..., 1:4]
    w = q[..., 0:1]
    t = 2.0 * np.cross(u, v)
    return v + w * t + np.cross(u, t)


def quat_rotate_inverse(q, v):
    """Rotate vectors v by the inverse of q (world -> body)."""
    return quat_rotate(quat_conjugate(q), v)


def quat_to_matrix(q):
    """Rotation matrix of q, shape (..., 3, 3)."""
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = (q[..., i] for i in range(4))
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    row0 = np.stack([1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)], axis=-1)
    row1 = np.stack([2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)], axis=-1)
    row2 = np.stack([2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)], axis=-1)
    return np.stack([row0, row1, row2], axis=-2)


def matrix_to_quat(R):
    """Quaternion of a rotation matrix (Shepperd's method, batched)."""
    R = np.asarray(R, dtype=np.float64)
    batch = R.shape[:-2]
    Rf = R.reshape((-1, 3, 3))
    n = Rf.shape[0]
    q = np.empty((n, 4))
    tr = np.trace(Rf, axis1=-2, axis2=-1)
    d = np.stack(
        [
            1.0 + tr,
            1.0 + 2.0 * Rf[:, 0, 0] - tr,
            1.0 + 2.0 * Rf[:, 1, 1] - tr,
            1.0 + 2.0 * Rf[:, 2, 2] - tr,
        ],
        axis=-1,
    )
    case = np.argmax(d, axis=-1)

    m = case == 0
    if np.any(m):
        w = 0.5 * np.sqrt(d[m, 0])
        s = 0.25 / w
        q[m, 0] = w
        q[m, 1] = (Rf[m, 2, 1] - Rf[m, 1, 2]) * s
        q[m, 2] = (Rf[m, 0, 2] - Rf[m, 2, 0]) * s
        q[m, 3] = (Rf[m, 1, 0] - Rf[m, 0, 1]) * s
    m = case == 1
    if np.any(m):
        x = 0.5 * np.sqrt(d[m, 1])
        s = 0.25 / x
        q[m, 1] = x
        q[m, 0] = (Rf[m, 2, 1] - Rf[m, 1, 2]) * s
        q[m, 2] = (Rf[m, 0, 1] + Rf[m, 1, 0]) * s
        q[m, 3] = (Rf[m, 0, 2] + Rf[m, 2, 0]) * s
    m = case == 2
    if np.any(m):
        y = 0.5 * np.sqrt(d[m, 2])
        s = 0.25 / y
        q[m, 2] = y
        q[m, 0] = (Rf[m, 0, 2] - Rf[m, 2, 0]) * s
        q[m, 1] = (Rf[m, 0, 1] + Rf[m, 1, 0]) * s
        q[m, 3] = (Rf[m, 1, 2] + Rf[m, 2, 1]) * s
    m = case == 3
    if np.any(m):
        z = 0.5 * np.sqrt(d[m, 3])
        s = 0.25 / z
        q[m, 3] = z
        q[m, 0] = (Rf[m, 1, 0] - Rf[m, 0, 1]) * s
        q[m, 1] = (Rf[m, 0, 2] + Rf[m, 2, 0]) * s
        q[m, 2] = (Rf[m, 1, 2] + Rf[m, 2, 1]) * s
    return quat_normalize(q.reshape(batch + (4,)))


def quat_from_axis_angle(axis, angle):
    """Unit quaternion for a rotation of `angle` radians about `axis`."""
    axis = np.asarray(axis, dtype=np.float64)
    angle = np.asarray(angle, dtype=np.float64)
    n = np.linalg.norm(axis, axis=-1, keepdims=True)
    if np.any(n < 1e-12):
        raise DegenerateInput("rotation axis has near-zero magnitude")
    axis = axis / n
    half = angle[..., None] / 2.0
    return quat_normalize(
        np.concatenate([np.cos(half), np.sin(half) * axis], axis=-1)
    )


def quat_from_rotation_vector(phi):
    """Exponential map: rotation vector (axis * angle) to quaternion."""
    phi = np.asarray(phi, dtype=np.float64)
    angle = np.linalg.norm(phi, axis=-1, keepdims=True)
    half = angle / 2.0
    # sin(a/2)/a -> 1/2 as a -> 0; series keeps the map smooth at zero
    small = angle < 1e-8
    k = np.where(small, 0.5 - angle * angle / 48.0, np.sin(half) / np.where(small, 1.0, angle))
    return quat_normalize(np.concatenate([np.cos(half), k * phi], axis=-1))


def quat_from_euler(euler):
    """Quaternion from [roll, pitch, yaw] (intrinsic Z-Y-X)."""
    euler = np.asarray(euler, dtype=np.float64)
    hr, hp, hy = euler[..., 0] / 2.0, euler[..., 1] / 2.0, euler[..., 2] / 2.0
    cr, sr = np.cos(hr), np.sin(hr)
    cp, sp = np.cos(hp), np.sin(hp)
    cy, sy = np.cos(hy), np.sin(hy)
    return quat_normalize(
        np.stack(
            [
                cr * cp * cy + sr * sp * sy,
                sr * cp * cy - cr * sp * sy,
                cr * sp * cy + sr * cp * sy,
                cr * cp * sy - sr * sp * cy,
            ],
            axis=-1,
        )
    )


def quat_to_euler(q):
    """[roll, pitch, yaw] of q, each wrapped to (-pi, pi].

    Near the pitch singularity (|pitch| within ~1e-6 of pi/2) roll and yaw
    are not separable; the full in-plane angle is assigned to yaw and roll
    is set to zero, deterministically.
    """
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = (q[..., i] for i in range(4))
    sinp = np.clip(2.0 * (w * y - z * x), -1.0, 1.0)
    pitch = np.arcsin(sinp)
    roll = np.arctan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y))
    yaw = np.arctan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))

    gimbal = np.pi / 2.0 - np.abs(pitch) < _EPS_GIMBAL
    if np.any(gimbal):
        # at the pole only the in-plane angle is observable; for either pitch
        # sign it equals 2*atan2(z, w); roll is zeroed by convention
        yaw_g = 2.0 * np.arctan2(z, w)
        yaw_g = np.arctan2(np.sin(yaw_g), np.cos(yaw_g))
        yaw = np.where(gimbal, yaw_g, yaw)
        roll = np.where(gimbal, 0.0, roll)
        pitch = np.where(gimbal, np.sign(sinp) * np.pi / 2.0, pitch)
    return wrap_angle(np.stack([roll, pitch, yaw], axis=-1))


def euler_error(current, desired):
    """Componentwise Euler difference current - desired, re-wrapped."""
    return wrap_angle(
        wrap_angle(np.asarray(current, dtype=np.float64))
        - wrap_angle(np.asarray(desired, dtype=np.float64))
    )


def quat_to_sixd(q):
    """First two rotation-matrix columns of q, column-major (shape (..., 6))."""
    R = quat_to_matrix(q)
    return np.concatenate([R[..., :, 0], R[..., :, 1]], axis=-1)


def sixd_to_matrix(s):
    """Decode a two-column encoding into a proper rotation matrix.

    Gram-Schmidt: normalize the first vector, orthogonalize and normalize the
    second against it, complete with the cross product. Scale-invariant.

    Raises DegenerateInput when either vector has norm < 1e-6 or the two are
    parallel within 1e-6.
    """
    s = np.asarray(s, dtype=np.float64)
    a = s[..., 0:3]
    b = s[..., 3:6]
    na = np.linalg.norm(a, axis=-1, keepdims=True)
    nb = np.linalg.norm(b, axis=-1, keepdims=True)
    if np.any(na < _EPS_NORM) or np.any(nb < _EPS_NORM):
        raise DegenerateInput("6D encoding has a near-zero column")
    c0 = a / na
    bu = b / nb
    cosab = np.sum(c0 * bu, axis=-1, keepdims=True)
    if np.any(np.abs(cosab) > 1.0 - _EPS_NORM):
        raise DegenerateInput("6D encoding columns are near parallel")
    c1 = bu - cosab * c0
    c1 = c1 / np.linalg.norm(c1, axis=-1, keepdims=True)
    c2 = np.cross(c0, c1)
    return np.stack([c0, c1, c2], axis=-1)


def sixd_to_quat(s):
    return matrix_to_quat(sixd_to_matrix(s))


def body_z_axis(q):
    """Body-frame z axis expressed in the world frame (third matrix column)."""
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = (q[..., i] for i in range(4))
    return np.stack(
        [2.0 * (x * z + w * y), 2.0 * (y * z - w * x), 1.0 - 2.0 * (x * x + y * y)],
        axis=-1,
    )


def geodesic_angle(q1, q2):
    """Geodesic distance on SO(3) between two attitudes, in [0, pi].

    Diagnostic companion to euler_error: rewards and metrics use the wrapped
    componentwise Euler difference, this gives the frame-independent angle.
    """
    q1 = np.asarray(q1, dtype=np.float64)
    q2 = np.asarray(q2, dtype=np.float64)
    dot = np.clip(np.abs(np.sum(q1 * q2, axis=-1)), 0.0, 1.0)
    return 2.0 * np.arccos(dot)


def sample_uniform_axis_angle(rng, max_angle, size=None):
    """Random rotation: axis uniform on the sphere, signed angle uniform.

    The angle is drawn uniformly from [-max_angle, max_angle]; this is the
    axis-angle distribution used for initial attitudes and targets (it is not
    the Haar-uniform distribution on SO(3)).
    """
    if not 0.0 < max_angle <= np.pi + 1e-12:
        raise ValueError("max_angle must lie in (0, pi]")
    shape = () if size is None else (size,)
    axis = rng.standard_normal(shape + (3,))
    n = np.linalg.norm(axis, axis=-1, keepdims=True)
    # resample the (measure-zero) degenerate draws deterministically
    while np.any(n < 1e-12):
        bad = n[..., 0] < 1e-12
        axis[bad] = rng.standard_normal((int(np.sum(bad)), 3))
        n = np.linalg.norm(axis, axis=-1, keepdims=True)
    axis = axis / n
    angle = rng.uniform(-max_angle, max_angle, size=shape)
    return quat_from_axis_angle(axis, angle)


def identity_quat(size=None):
    if size is None:
        return np.array([1.0, 0.0, 0.0, 0.0])
    q = np.zeros((size, 4))
    q[:, 0] = 1.0
    return q
