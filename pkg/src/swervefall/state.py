"""State representations: orientation, body state, steering, and torques.

Conventions:
    * Body frame: x forward, y left, z up (right-handed).  World frame has
      Z up; gravity is -Z.
    * Orientation is a unit quaternion (w, x, y, z), body-to-world, and is
      the integrated representation.  Euler angles are a Z-Y-X (yaw-pitch-
      roll) output view only: roll phi about x, pitch theta about y, yaw
      psi about z.  Positive pitch tips the nose down in this frame.
    * Wheels are numbered 1..4 at steering points (+a/2,-b/2), (+a/2,+b/2),
      (-a/2,+b/2), (-a/2,-b/2); diagonal pairs are (1,3) and (2,4).
    * Steering angles delta_i measure deviation from the forward driving
      direction; the brackets of wheels 2 and 3 are mounted pi-rotated, so
      their frame angle is delta_i + pi.

All types are frozen value objects backed by read-only numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SYMMETRY_TOL = 1e-9
GIMBAL_PROXIMITY_DEG = 89.0


class AsymmetricSteering(Exception):
    """Steering state violates the flight symmetry d1=d3, d2=d4."""


class AsymmetricTorque(Exception):
    """Torque command violates the flight symmetry t3=-t1, t4=-t2."""


def wrap_angle(angle: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return float((angle + math.pi) % (2.0 * math.pi) - math.pi)


def _frozen(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(shape)
    arr.setflags(write=False)
    return arr


# --- quaternions ------------------------------------------------------------

def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    norm = float(np.linalg.norm(q))
    if norm < 1e-12:
        raise ValueError("cannot normalize near-zero quaternion")
    return q / norm


def quat_multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrix R such that v_world = R @ v_body."""
    w, x, y, z = quat_normalize(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_derivative(q: np.ndarray, omega_body: np.ndarray) -> np.ndarray:
    """Kinematic rate q_dot = 0.5 * q (x) (0, omega_body)."""
    ow, ox, oy, oz = 0.0, *np.asarray(omega_body, dtype=float)
    return 0.5 * quat_multiply(q, np.array([ow, ox, oy, oz]))


def quat_from_euler(phi: float, theta: float, psi: float) -> np.ndarray:
    """Unit quaternion for intrinsic Z-Y-X angles (yaw, pitch, roll)."""
    cphi, sphi = math.cos(phi / 2), math.sin(phi / 2)
    cth, sth = math.cos(theta / 2), math.sin(theta / 2)
    cpsi, spsi = math.cos(psi / 2), math.sin(psi / 2)
    qz = np.array([cpsi, 0.0, 0.0, spsi])
    qy = np.array([cth, 0.0, sth, 0.0])
    qx = np.array([cphi, sphi, 0.0, 0.0])
    return quat_multiply(quat_multiply(qz, qy), qx)


@dataclass(frozen=True)
class EulerAngles:
    """Z-Y-X angles [rad] with a gimbal-proximity warning flag."""

    phi: float
    theta: float
    psi: float
    gimbal_proximity: bool = False

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.theta, self.psi])


def euler_from_quaternion(q: np.ndarray) -> EulerAngles:
    """Extract Z-Y-X angles; theta is clamped to [-pi/2, pi/2].

    Sets ``gimbal_proximity`` when |theta| exceeds 89 deg, where phi and
    psi become ill-conditioned.
    """
    w, x, y, z = quat_normalize(q)
    sin_theta = max(-1.0, min(1.0, 2.0 * (w * y - z * x)))
    theta = math.asin(sin_theta)
    phi = math.atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y))
    psi = math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))
    near_gimbal = abs(theta) > math.radians(GIMBAL_PROXIMITY_DEG)
    return EulerAngles(phi, theta, psi, gimbal_proximity=near_gimbal)


# --- steering and submovement coordinates -----------------------------------

@dataclass(frozen=True)
class SteeringState:
    """Four steering angles delta_1..delta_4 [rad], wrapped to [-pi, pi)."""

    delta: np.ndarray

    def __init__(self, delta) -> None:
        values = [wrap_angle(d) for d in np.asarray(delta, dtype=float).reshape(4)]
        object.__setattr__(self, "delta", _frozen(values, (4,)))

    def is_flight_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        d = self.delta
        return abs(d[0] - d[2]) <= tol and abs(d[1] - d[3]) <= tol

    def require_flight_symmetric(self, tol: float = SYMMETRY_TOL) -> None:
        if not self.is_flight_symmetric(tol):
            raise AsymmetricSteering(
                f"steering not symmetric: delta={self.delta.tolist()}"
            )


@dataclass(frozen=True)
class SubmovementParams:
    """Coordinated steering coordinates.

    alpha: diagonal pairs rotate in opposing directions; sets the ratio of
    roll vs pitch authority (isotropic at +-pi/4, singular at 0 and +-pi/2).
    beta: both pairs rotate together; rotates the authority axes and is the
    coordinate conjugate to yaw reaction.
    """

    alpha: float
    beta: float


@dataclass(frozen=True)
class TorqueCommand:
    """Wheel drive torques [N·m], net per-joint steering torque, and
    per-channel saturation flags (four wheels then steering)."""

    tau: np.ndarray
    tau_delta: float = 0.0
    saturated: np.ndarray = None  # type: ignore[assignment]

    def __init__(self, tau, tau_delta: float = 0.0, saturated=None) -> None:
        object.__setattr__(self, "tau", _frozen(tau, (4,)))
        object.__setattr__(self, "tau_delta", float(tau_delta))
        if saturated is None:
            saturated = np.zeros(5, dtype=bool)
        flags = np.array(saturated, dtype=bool).reshape(5)
        flags.setflags(write=False)
        object.__setattr__(self, "saturated", flags)

    @staticmethod
    def zero() -> "TorqueCommand":
        return TorqueCommand(np.zeros(4))

    def is_flight_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        t = self.tau
        return abs(t[0] + t[2]) <= tol and abs(t[1] + t[3]) <= tol

    def require_flight_symmetric(self, tol: float = SYMMETRY_TOL) -> None:
        if not self.is_flight_symmetric(tol):
            raise AsymmetricTorque(
                f"torques not symmetric: tau={self.tau.tolist()}"
            )

    def any_saturated(self) -> bool:
        return bool(self.saturated.any())


@dataclass(frozen=True)
class BodyTorque:
    """Net torque on the base in body axes [N·m], with the rotated
    authority-axis components available for analysis."""

    tau_x: float
    tau_y: float
    tau_z: float
    tau_x_prime: float = 0.0
    tau_y_prime: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.tau_x, self.tau_y, self.tau_z])


@dataclass(frozen=True)
class BodyState:
    """Full kinematic state of the base plus wheel spin rates.

    r_ob, v_ob: position/velocity of the base mass center in world frame.
    quat: body-to-world unit quaternion (w, x, y, z), renormalized on
    construction.  omega: body angular velocity in body axes [rad/s].
    wheel_speed: wheel spin rates about their axles [rad/s].
    """

    r_ob: np.ndarray
    v_ob: np.ndarray
    quat: np.ndarray
    omega: np.ndarray
    wheel_speed: np.ndarray = None  # type: ignore[assignment]

    def __init__(self, r_ob, v_ob, quat, omega, wheel_speed=None) -> None:
        object.__setattr__(self, "r_ob", _frozen(r_ob, (3,)))
        object.__setattr__(self, "v_ob", _frozen(v_ob, (3,)))
        object.__setattr__(self, "quat", _frozen(quat_normalize(quat), (4,)))
        object.__setattr__(self, "omega", _frozen(omega, (3,)))
        if wheel_speed is None:
            wheel_speed = np.zeros(4)
        object.__setattr__(self, "wheel_speed", _frozen(wheel_speed, (4,)))

    @staticmethod
    def at_rest(position=(0.0, 0.0, 0.0)) -> "BodyState":
        return BodyState(position, np.zeros(3), np.array([1.0, 0, 0, 0]), np.zeros(3))

    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.quat)

    def euler(self) -> EulerAngles:
        return euler_from_quaternion(self.quat)
