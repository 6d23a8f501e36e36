"""Identified actuator models and command/observation latency.

Three pieces live here:

* RotorModel: a bivariate polynomial thrust map f(cmd, V), quadratic in the
  normalized command and linear in supply voltage (with cross terms), plus
  its monotone inverse and the thrust-proportional reaction torque.
* JointServo: the tilt joints as PD-controlled DC motors on an effective
  rotational inertia, with effort, velocity and position limits.
* DelayLine: integer-step command/observation latency, exact FIFO semantics,
  with per-instance delays so a batch of environments can each hold a
  different latency drawn at episode start.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfRange, Unreachable

# Polynomial basis for the rotor map, evaluated in this fixed order.
ROTOR_BASIS = ("1", "cmd", "cmd^2", "V", "cmd*V", "cmd^2*V")


def rotor_basis_matrix(cmd, voltage) -> np.ndarray:
    """Design matrix over the rotor basis, shape (..., 6)."""
    cmd = np.asarray(cmd, dtype=np.float64)
    v = np.asarray(voltage, dtype=np.float64)
    one = np.ones(np.broadcast_shapes(cmd.shape, v.shape))
    return np.stack(
        [one, cmd * one, cmd**2 * one, v * one, cmd * v, cmd**2 * v], axis=-1
    )


@dataclass
class RotorModel:
    """Thrust map of one rotor: f(cmd, V) over fitted command/voltage ranges.

    The shipped default is a synthetic monotone map anchored to produce the
    20 N thrust ceiling at full command and full voltage; real coefficients
    come out of the identification fits and are loaded from config.
    """

    coeffs: np.ndarray = field(
        default_factory=lambda: np.array([0.0, 0.0, 0.0, 0.0, 0.0, 20.0 / 26.0])
    )
    torque_thrust_ratio: float = 0.0165  # m
    thrust_limit: float = 20.0  # N
    cmd_range: tuple[float, float] = (0.0, 1.0)
    voltage_range: tuple[float, float] = (16.0, 26.0)
    nominal_voltage: float = 24.0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if self.coeffs.shape != (6,):
            raise ValueError("rotor model takes 6 polynomial coefficients")

    def to_mapping(self) -> dict:
        return {
            "rotor.coeffs": [float(c) for c in self.coeffs],
            "rotor.torque_thrust_ratio": self.torque_thrust_ratio,
            "rotor.thrust_limit": self.thrust_limit,
            "rotor.cmd_range": list(self.cmd_range),
            "rotor.voltage_range": list(self.voltage_range),
            "rotor.nominal_voltage": self.nominal_voltage,
        }

    @classmethod
    def from_mapping(cls, m: dict) -> "RotorModel":
        base = cls()
        return cls(
            coeffs=np.asarray(m.get("rotor.coeffs", base.coeffs), dtype=np.float64),
            torque_thrust_ratio=float(
                m.get("rotor.torque_thrust_ratio", base.torque_thrust_ratio)
            ),
            thrust_limit=float(m.get("rotor.thrust_limit", base.thrust_limit)),
            cmd_range=tuple(m.get("rotor.cmd_range", base.cmd_range)),
            voltage_range=tuple(m.get("rotor.voltage_range", base.voltage_range)),
            nominal_voltage=float(m.get("rotor.nominal_voltage", base.nominal_voltage)),
        )

    def monotone_in_cmd(self, n_grid: int = 64) -> bool:
        """Numerical check that thrust never decreases with command."""
        cmds = np.linspace(*self.cmd_range, n_grid)
        volts = np.linspace(*self.voltage_range, 9)
        f = rotor_basis_matrix(cmds[None, :], volts[:, None]) @ self.coeffs
        return bool(np.all(np.diff(f, axis=1) >= -1e-9))


def rotor_forward(model: RotorModel, cmd, voltage) -> np.ndarray:
    """Thrust in N for a command/voltage pair, clamped to [0, thrust_limit]."""
    cmd = np.asarray(cmd, dtype=np.float64)
    v = np.asarray(voltage, dtype=np.float64)
    lo, hi = model.cmd_range
    vlo, vhi = model.voltage_range
    if np.any(cmd < lo - 1e-9) or np.any(cmd > hi + 1e-9):
        raise OutOfRange(f"command outside fitted range [{lo}, {hi}]")
    if np.any(v < vlo - 1e-9) or np.any(v > vhi + 1e-9):
        raise OutOfRange(f"voltage outside fitted range [{vlo}, {vhi}] V")
    f = rotor_basis_matrix(cmd, v) @ model.coeffs
    return np.clip(f, 0.0, model.thrust_limit)


def rotor_torque(model: RotorModel, thrust) -> np.ndarray:
    """Reaction torque magnitude for a given thrust (sign set by spin direction)."""
    return model.torque_thrust_ratio * np.asarray(thrust, dtype=np.float64)


def rotor_inverse(
    model: RotorModel, thrust_target: float, voltage: float, tol: float = 1e-9
) -> float:
    """Command producing a requested thrust at the given voltage.

    Monotone bisection over the fitted command range to |f(cmd) - target|
    below tol (well inside the 1e-6 N contract). Raises Unreachable when the
    target exceeds the thrust available at this voltage.
    """
    lo, hi = model.cmd_range
    f_lo = float(rotor_forward(model, lo, voltage))
    f_hi = float(rotor_forward(model, hi, voltage))
    if thrust_target < -1e-12:
        raise Unreachable("negative thrust is not producible")
    if thrust_target > f_hi + 1e-9:
        raise Unreachable(
            f"target {thrust_target:.4g} N exceeds max {f_hi:.4g} N at {voltage} V"
        )
    if thrust_target <= f_lo:
        return lo
    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        if float(rotor_forward(model, mid, voltage)) < thrust_target:
            a = mid
        else:
            b = mid
        if b - a < 1e-15 or abs(float(rotor_forward(model, 0.5 * (a + b), voltage)) - thrust_target) < tol:
            break
    return 0.5 * (a + b)


@dataclass
class JointServo:
    """PD position servo on an effective rotational inertia.

    tau = Kp (q_cmd - q) - Kd qdot, clipped to the effort limit, drives
    qddot = tau / inertia. Defaults give a ~51 rad/s natural frequency at
    damping ratio ~0.7 (the effective inertia is a calibration choice; the
    stiffness/damping/limit values come from identification).
    """

    kp: float = 0.3449  # N m / rad
    kd: float = 0.0094  # N m s / rad
    inertia: float = 1.307e-4  # kg m^2
    velocity_limit: float = 10.0  # rad/s
    effort_limit: float = 3.0  # N m
    position_limit: float = 3.96  # rad

    @property
    def natural_frequency(self) -> float:
        return float(np.sqrt(self.kp / self.inertia))

    @property
    def damping_ratio(self) -> float:
        return float(self.kd / (2.0 * np.sqrt(self.kp * self.inertia)))

    def to_mapping(self) -> dict:
        return {
            "joint.kp": self.kp,
            "joint.kd": self.kd,
            "joint.inertia": self.inertia,
            "joint.velocity_limit": self.velocity_limit,
            "joint.effort_limit": self.effort_limit,
            "joint.position_limit": self.position_limit,
        }

    @classmethod
    def from_mapping(cls, m: dict) -> "JointServo":
        base = cls()
        return cls(
            kp=float(m.get("joint.kp", base.kp)),
            kd=float(m.get("joint.kd", base.kd)),
            inertia=float(m.get("joint.inertia", base.inertia)),
            velocity_limit=float(m.get("joint.velocity_limit", base.velocity_limit)),
            effort_limit=float(m.get("joint.effort_limit", base.effort_limit)),
            position_limit=float(m.get("joint.position_limit", base.position_limit)),
        )


def joint_step(servo: JointServo, q, qdot, q_cmd, dt: float, limits: bool = True):
    """One semi-implicit step of the servo: returns (q, qdot, applied_torque).

    With limits on: torque clipped to +-effort_limit, velocity clipped to
    +-velocity_limit, position hard-clamped at +-position_limit with the
    velocity zeroed against the stop. Incoming commands are clamped to the
    position limit so the servo never chases unreachable targets.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    q = np.asarray(q, dtype=np.float64)
    qdot = np.asarray(qdot, dtype=np.float64)
    q_cmd = np.asarray(q_cmd, dtype=np.float64)
    if limits:
        q_cmd = np.clip(q_cmd, -servo.position_limit, servo.position_limit)
    tau = servo.kp * (q_cmd - q) - servo.kd * qdot
    if limits:
        tau = np.clip(tau, -servo.effort_limit, servo.effort_limit)
    qdot_new = qdot + dt * tau / servo.inertia
    if limits:
        qdot_new = np.clip(qdot_new, -servo.velocity_limit, servo.velocity_limit)
    q_new = q + dt * qdot_new
    if limits:
        at_stop = np.abs(q_new) > servo.position_limit
        q_new = np.clip(q_new, -servo.position_limit, servo.position_limit)
        qdot_new = np.where(at_stop, 0.0, qdot_new)
    return q_new, qdot_new, tau


class DelayLine:
    """Exact integer-step delay with per-instance delay lengths.

    Values pushed at step t pop out at step t + delay; before enough pushes
    have happened the configured initial fill is returned. `delays` is a
    scalar or an (N,) array matching the leading dimension of the values, so
    each environment in a batch can carry its own latency.
    """

    def __init__(self, delays, initial, max_delay: int | None = None):
        self._delays = np.asarray(delays, dtype=np.int64)
        if np.any(self._delays < 0):
            raise ValueError("delays must be non-negative")
        initial = np.asarray(initial, dtype=np.float64)
        cap = int(max(int(np.max(self._delays)) + 1, 1) if max_delay is None else max_delay + 1)
        if cap <= int(np.max(self._delays)):
            raise ValueError("max_delay smaller than configured delay")
        self._buf = np.broadcast_to(initial, (cap,) + initial.shape).copy()
        self._t = 0

    @property
    def delays(self) -> np.ndarray:
        return self._delays

    def push_pop(self, value) -> np.ndarray:
        """Insert the value for the current step and read the delayed one."""
        cap = self._buf.shape[0]
        self._buf[self._t % cap] = value
        read = self._t - self._delays
        out_idx = np.where(read < 0, 0, read % cap)  # placeholder index when unfilled
        if self._delays.ndim == 0:
            out = self._buf[int(out_idx)] if read >= 0 else self._initial_slice()
        else:
            out = self._buf[out_idx, np.arange(self._buf.shape[1])]
            unfilled = read < 0
            if np.any(unfilled):
                out = np.where(
                    unfilled.reshape(unfilled.shape + (1,) * (out.ndim - unfilled.ndim)),
                    self._initial_slice(),
                    out,
                )
        self._t += 1
        return out.copy()

    def _initial_slice(self):
        # slot just past the newest write still holds the initial fill until
        # the buffer wraps; keep an explicit copy instead to stay exact
        if not hasattr(self, "_init_copy"):
            raise RuntimeError("initial fill missing")
        return self._init_copy

    def reset(self, delays=None, initial=None):
        """Re-arm the line, optionally with new delays and fill values."""
        if delays is not None:
            self._delays = np.asarray(delays, dtype=np.int64)
            if int(np.max(self._delays)) >= self._buf.shape[0]:
                raise ValueError("delay exceeds line capacity")
        if initial is not None:
            initial = np.asarray(initial, dtype=np.float64)
            self._buf[:] = initial
        self._init_copy = self._buf[0].copy()
        self._t = 0
