"""Dynamics and attitude control for a four-wheel independent
drive-and-steer robot in ballistic flight.

The wheels' drive reaction torques steer the base orientation while
airborne; this package models the flight dynamics, the freefall-detection
state machine, and the PD attitude controller, and ships a scenario CLI
with reference drop and ledge configurations.
"""

from .controller import (
    AttitudeControlLoop,
    ControllerConfig,
    ControllerGains,
    ControllerMode,
    LinearPlant,
    control_step,
    detect_freefall,
    fsm_step,
    linearized_plant,
    pd_attitude,
)
from .dynamics import (
    InertiaReflection,
    ReactionLoads,
    StateDerivative,
    angular_acceleration,
    oracle_newton_euler,
    reflected_inertia,
    state_derivative,
)
from .kinematics import (
    ManipulabilityReport,
    SingularConfiguration,
    TorqueJacobian,
    allocate_body_torque,
    jacobian_determinant,
    manipulability,
    map_wheel_to_body_torque,
    steering_from_submovements,
    submovements_from_steering,
)
from .params import ConfigError, RobotParams, ValidationReport, validate_params
from .scenario import RunSummary, compare, run_scenario, sweep
from .simulation import (
    ImuReading,
    NoiseModel,
    NonFiniteState,
    ScenarioConfig,
    TelemetrySample,
    Trajectory,
    imu_sample,
    simulate,
    step_rk4,
)
from .state import (
    AsymmetricSteering,
    AsymmetricTorque,
    BodyState,
    BodyTorque,
    EulerAngles,
    SteeringState,
    SubmovementParams,
    TorqueCommand,
    euler_from_quaternion,
    quat_from_euler,
)

__version__ = "0.1.0"

__all__ = [
    "AsymmetricSteering",
    "AsymmetricTorque",
    "AttitudeControlLoop",
    "BodyState",
    "BodyTorque",
    "ConfigError",
    "ControllerConfig",
    "ControllerGains",
    "ControllerMode",
    "EulerAngles",
    "ImuReading",
    "InertiaReflection",
    "LinearPlant",
    "ManipulabilityReport",
    "NoiseModel",
    "NonFiniteState",
    "ReactionLoads",
    "RobotParams",
    "RunSummary",
    "ScenarioConfig",
    "SingularConfiguration",
    "StateDerivative",
    "SteeringState",
    "SubmovementParams",
    "TelemetrySample",
    "TorqueCommand",
    "TorqueJacobian",
    "Trajectory",
    "ValidationReport",
    "allocate_body_torque",
    "angular_acceleration",
    "compare",
    "control_step",
    "detect_freefall",
    "euler_from_quaternion",
    "fsm_step",
    "imu_sample",
    "jacobian_determinant",
    "linearized_plant",
    "manipulability",
    "map_wheel_to_body_torque",
    "oracle_newton_euler",
    "pd_attitude",
    "quat_from_euler",
    "reflected_inertia",
    "run_scenario",
    "simulate",
    "state_derivative",
    "steering_from_submovements",
    "step_rk4",
    "submovements_from_steering",
    "sweep",
    "validate_params",
]
