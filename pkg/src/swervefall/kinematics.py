"""Steering parametrization, torque Jacobians, and torque allocation.

The airborne steering motion decomposes into two coordinated coordinates:
``alpha`` (diagonal pairs opposing) and ``beta`` (pairs together), with

    delta_1 = delta_3 = beta + alpha
    delta_2 = delta_4 = beta - alpha

Under flight symmetry (tau_3 = -tau_1, tau_4 = -tau_2, equal steering
torque tau_delta at every joint) the net base torque is linear in
(tau_1, tau_2, tau_delta):

    [tau_x]   [-2 cos(a+b)   2 cos(a-b)   0] [tau_1  ]
    [tau_y] = [ 2 sin(a+b)   2 sin(a-b)   0] [tau_2  ]
    [tau_z]   [ 0            0            4] [tau_delta]

Row convention note: this library fixes the roll/pitch row assignment to
the form validated by the linearized plant equations at the isotropic
configuration (roll = sqrt(2)(tau_2 - tau_1), pitch = sqrt(2)(tau_1 +
tau_2)); the dynamics oracle is built with the same convention, and the
two are cross-checked in the acceptance suite.

Singularity analysis uses the per-pair normalized direction matrix

    N(a, b) = [[ sin(a+b)  sin(a-b)]
               [-cos(a+b)  cos(a-b)]]

whose determinant is sin(2*alpha): zero at alpha in {0, +-pi/2} where one
authority axis collapses, maximal at the isotropic alpha = +-pi/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import RobotParams
from .state import (
    BodyTorque,
    SteeringState,
    SubmovementParams,
    TorqueCommand,
    wrap_angle,
)

# Allocation refuses below this |det N|; inverting closer to the
# singularity amplifies wheel torques without bound.
SINGULARITY_TOL = 1e-6

# Manipulability reports singular below this |det N|.
SINGULAR_DET_TOL = 1e-9


class SingularConfiguration(Exception):
    """Torque allocation attempted at (or too near) a singular alpha."""


def steering_from_submovements(sub: SubmovementParams) -> SteeringState:
    """Expand (alpha, beta) to the four symmetric steering angles."""
    d13 = wrap_angle(sub.beta + sub.alpha)
    d24 = wrap_angle(sub.beta - sub.alpha)
    return SteeringState([d13, d24, d13, d24])


def submovements_from_steering(s: SteeringState) -> SubmovementParams:
    """Recover (alpha, beta) from a symmetric steering state.

    Raises AsymmetricSteering when d1 != d3 or d2 != d4.
    """
    s.require_flight_symmetric()
    d = s.delta
    alpha = ((d[0] + d[2]) - (d[1] + d[3])) / 4.0
    beta = ((d[0] + d[2]) + (d[1] + d[3])) / 4.0
    return SubmovementParams(alpha=float(alpha), beta=float(beta))


@dataclass(frozen=True)
class TorqueJacobian:
    """Configuration-dependent torque maps for one (alpha, beta).

    full: 3x3 map (tau_1, tau_2, tau_delta) -> (tau_x, tau_y, tau_z).
    roll_pitch: its upper-left 2x2 block.
    direction: the per-pair normalized direction matrix N with
        det N = sin(2 alpha); relates to the block by a row swap and a
        factor 2 (N = roll_pitch[[1, 0], :] / 2).
    reaction: 3x4 matrix mapping per-wheel axle-normal reaction torques
        into body axes (columns are the wheel rolling directions).
    """

    alpha: float
    beta: float
    full: np.ndarray
    roll_pitch: np.ndarray
    direction: np.ndarray
    reaction: np.ndarray


def _direction_matrix(alpha: float, beta: float) -> np.ndarray:
    return np.array([
        [math.sin(alpha + beta), math.sin(alpha - beta)],
        [-math.cos(alpha + beta), math.cos(alpha - beta)],
    ])


def torque_jacobian(sub: SubmovementParams) -> TorqueJacobian:
    """Build the torque Jacobians at a symmetric steering configuration."""
    a, b = sub.alpha, sub.beta
    full = np.array([
        [-2.0 * math.cos(a + b), 2.0 * math.cos(a - b), 0.0],
        [2.0 * math.sin(a + b), 2.0 * math.sin(a - b), 0.0],
        [0.0, 0.0, 4.0],
    ])
    d1 = b + a
    d2 = b - a
    reaction = np.array([
        [math.cos(d1), -math.cos(d2), -math.cos(d1), math.cos(d2)],
        [math.sin(d1), -math.sin(d2), -math.sin(d1), math.sin(d2)],
        [0.0, 0.0, 0.0, 0.0],
    ])
    return TorqueJacobian(
        alpha=a,
        beta=b,
        full=full,
        roll_pitch=full[:2, :2].copy(),
        direction=_direction_matrix(a, b),
        reaction=reaction,
    )


def jacobian_determinant(alpha: float) -> float:
    """Closed form of det N: sin(2 alpha)."""
    return math.sin(2.0 * alpha)


@dataclass(frozen=True)
class ManipulabilityReport:
    """Authority-ellipsoid geometry at one configuration.

    lambda_x_prime and lambda_y_prime are the body-torque magnitudes
    reachable per unit wheel torque about the two authority axes
    (2*sqrt(2)|sin a| and 2*sqrt(2)|cos a|); axis_angle is the rotation
    beta of those axes.  singular means |det| < 1e-9.
    """

    lambda_x_prime: float
    lambda_y_prime: float
    axis_angle: float
    det: float
    singular: bool


def manipulability(sub: SubmovementParams) -> ManipulabilityReport:
    jac = torque_jacobian(sub)
    det = float(np.linalg.det(jac.direction))
    # Authority per axis: row norms of the full-scale block at beta = 0;
    # beta only rotates the axes (orthogonal), leaving the magnitudes.
    aligned = 2.0 * _direction_matrix(sub.alpha, 0.0)
    lam_x = float(np.linalg.norm(aligned[0]))
    lam_y = float(np.linalg.norm(aligned[1]))
    return ManipulabilityReport(
        lambda_x_prime=lam_x,
        lambda_y_prime=lam_y,
        axis_angle=sub.beta,
        det=det,
        singular=abs(det) < SINGULAR_DET_TOL,
    )


def map_wheel_to_body_torque(
    cmd: TorqueCommand, sub: SubmovementParams
) -> BodyTorque:
    """Forward map: symmetric wheel/steering torques to net base torque.

    Raises AsymmetricTorque unless tau_3 = -tau_1 and tau_4 = -tau_2.
    """
    cmd.require_flight_symmetric()
    jac = torque_jacobian(sub)
    pair = np.array([cmd.tau[0], cmd.tau[1], cmd.tau_delta])
    body = jac.full @ pair
    primed = 2.0 * _direction_matrix(sub.alpha, 0.0) @ pair[:2]
    return BodyTorque(
        tau_x=float(body[0]),
        tau_y=float(body[1]),
        tau_z=float(body[2]),
        tau_x_prime=float(primed[0]),
        tau_y_prime=float(primed[1]),
    )


def allocate_body_torque(
    desired: BodyTorque, sub: SubmovementParams, limits: RobotParams
) -> TorqueCommand:
    """Invert the torque map and clamp each channel to its limit.

    Saturation is independent per channel (no direction-preserving
    scaling); flags mark clamped channels.  Raises SingularConfiguration
    when |det N| < 1e-6, where the inverse would amplify without bound.
    """
    jac = torque_jacobian(sub)
    det = float(np.linalg.det(jac.direction))
    if abs(det) < SINGULARITY_TOL:
        raise SingularConfiguration(
            f"|det| = {abs(det):.3e} at alpha = {sub.alpha:.6f}"
        )
    pair = np.linalg.solve(jac.full, desired.as_array())
    tau_1, tau_2 = float(pair[0]), float(pair[1])
    tau_delta = float(pair[2])

    limit_w = limits.tau_wheel_max
    limit_s = limits.tau_steer_max
    clamped_1 = max(-limit_w, min(limit_w, tau_1))
    clamped_2 = max(-limit_w, min(limit_w, tau_2))
    clamped_d = max(-limit_s, min(limit_s, tau_delta))
    flags = np.array([
        clamped_1 != tau_1,
        clamped_2 != tau_2,
        clamped_1 != tau_1,
        clamped_2 != tau_2,
        clamped_d != tau_delta,
    ])
    return TorqueCommand(
        tau=[clamped_1, clamped_2, -clamped_1, -clamped_2],
        tau_delta=clamped_d,
        saturated=flags,
    )
