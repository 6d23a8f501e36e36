"""Floating-base rigid-body dynamics of a quadrotor with tilting rotor arms.

The airframe is an X configuration: four arms at azimuths 45/135/225/315 deg,
each carrying a rotor module that tilts about the arm's radial axis. At tilt
q = 0 the rotor thrust points along body +z; tilting by q swings the thrust
in the tangential plane of that arm. Spin directions alternate around the
frame (+,-,+,-) so reaction torques cancel at equal hover thrusts.

State integration is semi-implicit Euler on the linear side (velocity first,
then position with the new velocity). The angular side advances the body
angular momentum and rotates it through the orientation increment, which
keeps world-frame angular momentum exactly conserved under zero torque at
any step size; it agrees with the plain body-frame Euler update to O(dt).

All functions broadcast over leading batch dimensions, so one set of code
serves both a single robot and a few thousand stacked environments.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import rotations as rot
from .errors import NonFiniteState, OutOfRangeThrust

GRAVITY = 9.81  # m/s^2

# X configuration: azimuths of the four arms, and alternating spin signs
DEFAULT_ARM_AZIMUTHS = np.deg2rad(np.array([45.0, 135.0, 225.0, 315.0]))
DEFAULT_SPIN_SIGNS = np.array([1.0, -1.0, 1.0, -1.0])


@dataclass
class PhysicalParams:
    """Rigid-body and actuation-limit constants of the airframe.

    `mass`, `inertia_diag` and `com_offset` may be scalars/(3,)-vectors for a
    single robot or (N,)/(N,3) arrays for a batch of randomized robots; the
    geometric fields are always shared.
    """

    mass: float | np.ndarray = 3.0386  # kg
    inertia_diag: np.ndarray = field(
        default_factory=lambda: np.array([0.0627, 0.0620, 0.0948])
    )  # kg m^2, about the COM
    rotor_arm_radius: float = 0.275  # m, half the motor-to-motor diagonal
    joint_limit: float = 3.96  # rad
    thrust_limit: float = 20.0  # N per rotor
    torque_thrust_ratio: float = 0.0165  # m, reaction torque per unit thrust
    gravity: float = GRAVITY  # m/s^2
    rotor_spin_signs: np.ndarray = field(default_factory=lambda: DEFAULT_SPIN_SIGNS.copy())
    arm_azimuths: np.ndarray = field(default_factory=lambda: DEFAULT_ARM_AZIMUTHS.copy())
    com_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))  # m, body frame

    def __post_init__(self):
        self.inertia_diag = np.asarray(self.inertia_diag, dtype=np.float64)
        self.rotor_spin_signs = np.asarray(self.rotor_spin_signs, dtype=np.float64)
        self.arm_azimuths = np.asarray(self.arm_azimuths, dtype=np.float64)
        self.com_offset = np.asarray(self.com_offset, dtype=np.float64)
        if np.any(np.asarray(self.mass) <= 0.0):
            raise ValueError("mass must be positive")
        if np.any(self.inertia_diag <= 0.0):
            raise ValueError("inertia components must be positive")
        if self.rotor_arm_radius <= 0.0:
            raise ValueError("rotor_arm_radius must be positive")
        if abs(float(np.sum(self.rotor_spin_signs))) > 1e-12:
            raise ValueError("spin signs must sum to zero (two CW, two CCW)")

    @property
    def hover_thrust(self) -> float | np.ndarray:
        """Per-rotor thrust balancing gravity with all tilts at zero."""
        return self.mass * self.gravity / 4.0

    def rotor_positions(self) -> np.ndarray:
        """Body-frame rotor hub positions, shape (4, 3)."""
        a = self.arm_azimuths
        return self.rotor_arm_radius * np.stack(
            [np.cos(a), np.sin(a), np.zeros_like(a)], axis=-1
        )

    def tilt_axes(self) -> np.ndarray:
        """Unit tilt axes (radial arm directions), shape (4, 3)."""
        a = self.arm_azimuths
        return np.stack([np.cos(a), np.sin(a), np.zeros_like(a)], axis=-1)

    # --- key-value config mapping -------------------------------------------------
    def to_mapping(self) -> dict:
        return {
            "mass": float(np.asarray(self.mass).ravel()[0]),
            "inertia": [float(v) for v in np.asarray(self.inertia_diag).reshape(-1, 3)[0]],
            "arm_radius": self.rotor_arm_radius,
            "joint_limit": self.joint_limit,
            "thrust_limit": self.thrust_limit,
            "torque_thrust_ratio": self.torque_thrust_ratio,
            "gravity": self.gravity,
            "spin_signs": [float(v) for v in self.rotor_spin_signs],
            "arm_azimuths_deg": [float(np.rad2deg(v)) for v in self.arm_azimuths],
            "com_offset": [float(v) for v in np.asarray(self.com_offset).reshape(-1, 3)[0]],
        }

    @classmethod
    def from_mapping(cls, m: dict) -> "PhysicalParams":
        base = cls()
        return cls(
            mass=float(m.get("mass", base.mass)),
            inertia_diag=np.asarray(m.get("inertia", base.inertia_diag), dtype=np.float64),
            rotor_arm_radius=float(m.get("arm_radius", base.rotor_arm_radius)),
            joint_limit=float(m.get("joint_limit", base.joint_limit)),
            thrust_limit=float(m.get("thrust_limit", base.thrust_limit)),
            torque_thrust_ratio=float(
                m.get("torque_thrust_ratio", base.torque_thrust_ratio)
            ),
            gravity=float(m.get("gravity", base.gravity)),
            rotor_spin_signs=np.asarray(m.get("spin_signs", base.rotor_spin_signs), dtype=np.float64),
            arm_azimuths=np.deg2rad(
                np.asarray(
                    m.get("arm_azimuths_deg", np.rad2deg(base.arm_azimuths)),
                    dtype=np.float64,
                )
            ),
            com_offset=np.asarray(m.get("com_offset", base.com_offset), dtype=np.float64),
        )


@dataclass
class RobotState:
    """Ground-truth simulator state; arrays carry optional leading batch dims."""

    position: np.ndarray  # (..., 3) m, world
    orientation: np.ndarray  # (..., 4) unit quaternion, body -> world
    velocity: np.ndarray  # (..., 3) m/s, world
    angular_velocity: np.ndarray  # (..., 3) rad/s, body
    joint_pos: np.ndarray  # (..., 4) rad
    joint_vel: np.ndarray  # (..., 4) rad/s

    @classmethod
    def rest(cls, batch: int | None = None) -> "RobotState":
        """At the origin, upright, zero twist, tilts at zero."""
        def z(d):
            return np.zeros(d if batch is None else (batch, d))

        return cls(
            position=z(3),
            orientation=rot.identity_quat(batch),
            velocity=z(3),
            angular_velocity=z(3),
            joint_pos=z(4),
            joint_vel=z(4),
        )

    def copy(self) -> "RobotState":
        return RobotState(
            self.position.copy(),
            self.orientation.copy(),
            self.velocity.copy(),
            self.angular_velocity.copy(),
            self.joint_pos.copy(),
            self.joint_vel.copy(),
        )

    def finite_mask(self) -> np.ndarray:
        """Per-instance all-finite flag (scalar bool for unbatched states)."""
        ok = np.isfinite(self.position).all(axis=-1)
        for a in (self.orientation, self.velocity, self.angular_velocity,
                  self.joint_pos, self.joint_vel):
            ok = ok & np.isfinite(a).all(axis=-1)
        return ok


@dataclass
class BodyWrench:
    """Force and torque accumulated in the body frame."""

    force: np.ndarray  # (..., 3) N
    torque: np.ndarray  # (..., 3) N m

    @classmethod
    def zero(cls, batch: int | None = None) -> "BodyWrench":
        shape = (3,) if batch is None else (batch, 3)
        return cls(np.zeros(shape), np.zeros(shape))

    def __add__(self, other: "BodyWrench") -> "BodyWrench":
        return BodyWrench(self.force + other.force, self.torque + other.torque)


def thrust_directions(params: PhysicalParams, joint_pos) -> np.ndarray:
    """Unit thrust directions in the body frame, shape (..., 4, 3).

    Rotating body +z about arm i's radial axis by q_i gives
    d_i = cos(q_i) * z_hat + sin(q_i) * (axis_i x z_hat).
    """
    q = np.asarray(joint_pos, dtype=np.float64)
    a = params.arm_azimuths
    cq, sq = np.cos(q), np.sin(q)
    # axis x z_hat = (sin a, -cos a, 0): the (negative) tangential direction
    dx = sq * np.sin(a)
    dy = -sq * np.cos(a)
    dz = cq * np.ones_like(sq)
    return np.stack([dx, dy, dz], axis=-1)


def rotor_wrench(params: PhysicalParams, joint_pos, thrusts) -> BodyWrench:
    """Total body wrench from four tilted rotors.

    Per rotor: force f_i d_i at hub position r_i, lever torque
    (r_i - com) x f_i d_i, and spin reaction torque sign_i * C * f_i d_i
    about the thrust axis. Torques are taken about the center of mass.

    Raises OutOfRangeThrust if any thrust lies outside [0, thrust_limit].
    """
    f = np.asarray(thrusts, dtype=np.float64)
    if np.any(f < -1e-12) or np.any(f > params.thrust_limit + 1e-9):
        raise OutOfRangeThrust(
            f"thrust outside [0, {params.thrust_limit}] N: "
            f"min {float(np.min(f)):.4g}, max {float(np.max(f)):.4g}"
        )
    d = thrust_directions(params, joint_pos)  # (..., 4, 3)
    forces = f[..., None] * d
    com = np.asarray(params.com_offset, dtype=np.float64)
    lever = params.rotor_positions() - com[..., None, :]  # (..., 4, 3)
    torques = np.cross(lever, forces)
    torques = torques + params.rotor_spin_signs[:, None] * (
        params.torque_thrust_ratio * forces
    )
    return BodyWrench(force=np.sum(forces, axis=-2), torque=np.sum(torques, axis=-2))


def step(
    params: PhysicalParams,
    state: RobotState,
    wrench: BodyWrench,
    external_force=None,
    external_torque=None,
    dt: float = 0.0025,
    check_finite: bool = True,
) -> RobotState:
    """Advance the floating base by one step of dt seconds.

    Linear side (world frame, semi-implicit):
        v += dt * (g + R F_body / m + F_ext / m);  p += dt * v_new
    Angular side (body frame): the gravity-free torque balance is applied to
    the body angular momentum h = I w, the orientation advances by
    exp(dt * w_pre), and h is carried through that rotation:
        h' = dR^T (h + dt * (tau_body + R^T tau_ext))
    which reduces to w += dt * I^-1 (tau - w x I w) at first order while
    conserving world angular momentum exactly when torques vanish.

    Joint states are untouched; the actuator models own them.

    Raises NonFiniteState when check_finite is set and the result contains
    NaN/Inf; batched callers pass check_finite=False and use finite_mask().
    """
    if not 0.0 < dt <= 0.01:
        raise ValueError("dt must lie in (0, 0.01] s")
    m = np.asarray(params.mass, dtype=np.float64)
    inertia = params.inertia_diag
    q = state.orientation

    f_world = rot.quat_rotate(q, wrench.force)
    if external_force is not None:
        f_world = f_world + np.asarray(external_force, dtype=np.float64)
    g_vec = np.array([0.0, 0.0, -params.gravity])
    vel = state.velocity + dt * (g_vec + f_world / m[..., None])
    pos = state.position + dt * vel

    tau = wrench.torque
    if external_torque is not None:
        tau = tau + rot.quat_rotate_inverse(q, np.asarray(external_torque, dtype=np.float64))
    h = inertia * state.angular_velocity + dt * tau
    omega_pre = h / inertia
    dq = rot.quat_from_rotation_vector(dt * omega_pre)
    orientation = rot.quat_normalize(rot.quat_multiply(q, dq))
    h = rot.quat_rotate_inverse(dq, h)
    omega = h / inertia

    out = RobotState(
        position=pos,
        orientation=orientation,
        velocity=vel,
        angular_velocity=omega,
        joint_pos=state.joint_pos,
        joint_vel=state.joint_vel,
    )
    if check_finite and not np.all(out.finite_mask()):
        raise NonFiniteState("integrator produced NaN/Inf; terminate the episode")
    return out


def apply_payload(params: PhysicalParams, added_mass: float, attach_offset) -> PhysicalParams:
    """Params with a point payload rigidly attached at a body-frame offset.

    Mass adds directly; the inertia gains the parallel-axis contribution of
    the payload about the body reference point; the center of mass shifts to
    the mass-weighted average. Only the diagonal inertia terms are kept,
    consistent with the diagonal airframe model.
    """
    if added_mass < 0.0:
        raise ValueError("added_mass must be non-negative")
    if added_mass == 0.0:
        return replace(params)
    r = np.asarray(attach_offset, dtype=np.float64)
    m0 = np.asarray(params.mass, dtype=np.float64)
    m1 = m0 + added_mass
    d2 = np.sum(r * r)
    di = added_mass * (d2 - r * r)  # diag of m (|r|^2 E - r r^T)
    com = (m0[..., None] * params.com_offset + added_mass * r) / m1[..., None]
    return replace(
        params,
        mass=m1,
        inertia_diag=params.inertia_diag + di,
        com_offset=com,
    )
