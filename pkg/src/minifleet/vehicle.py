"""Differential-drive vehicle kinematics.

The vehicle is a two-wheel differential drive: the state is an SE(2)
configuration (x, y, theta) and the only actuation channel is a pair of
normalized wheel thrusts in [-1, 1].  Thrust 1.0 maps to ``max_wheel_rate``
radians per second at the wheel.  With scaled wheel rates u_l, u_r the
configuration evolves as

    dx     = r/2 * (u_l + u_r) * cos(theta)
    dy     = r/2 * (u_l + u_r) * sin(theta)
    dtheta = r/L * (u_r - u_l)

where r is the wheel radius and L the axle length.  Constant-input motion
is a circular arc about the instantaneous center of curvature, which gives
us a closed-form oracle for the RK4 integrator.

Other steering models (Dubins car, unicycle twists) are emulated by
mapping their commanded (v, omega) back through the inverse of the
transition equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    theta = math.fmod(theta, TWO_PI)
    if theta > math.pi:
        theta -= TWO_PI
    elif theta <= -math.pi:
        theta += TWO_PI
    return theta


@dataclass(frozen=True)
class Pose2D:
    """An SE(2) configuration. theta is kept in (-pi, pi]."""

    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError("pose components must be finite")
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class WheelThrust:
    """Normalized left/right wheel commands, each in [-1, 1]."""

    u_left: float
    u_right: float

    def __post_init__(self) -> None:
        if not (-1.0 <= self.u_left <= 1.0 and -1.0 <= self.u_right <= 1.0):
            raise ValueError(
                f"thrust out of range [-1, 1]: ({self.u_left}, {self.u_right})"
            )


@dataclass(frozen=True)
class VehicleParams:
    """Physical vehicle constants.

    max_wheel_rate maps thrust 1.0 to a wheel angular speed in rad/s, so
    the top straight-line speed is wheel_radius_r * max_wheel_rate.
    body_radius is the bounding disc used for collision checks and grid
    sizing.
    """

    wheel_radius_r: float
    axle_length_L: float
    max_wheel_rate: float
    body_radius: float

    def __post_init__(self) -> None:
        for name in ("wheel_radius_r", "axle_length_L", "max_wheel_rate", "body_radius"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.axle_length_L > 2.0 * self.body_radius:
            raise ValueError("axle_length_L must not exceed 2 * body_radius")

    @property
    def max_speed(self) -> float:
        """Top straight-line speed in m/s (both wheels at thrust 1)."""
        return self.wheel_radius_r * self.max_wheel_rate


#: Desk-scale defaults for an ~8x5 cm vehicle; configuration, not ground truth.
DEFAULT_PARAMS = VehicleParams(
    wheel_radius_r=0.016,
    axle_length_L=0.05,
    max_wheel_rate=18.75,
    body_radius=0.047,
)


@dataclass(frozen=True)
class Twist2D:
    """Body-frame velocity command: forward speed v and yaw rate omega."""

    v: float
    omega: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v) and math.isfinite(self.omega)):
            raise ValueError("twist components must be finite")


@dataclass(frozen=True)
class DubinsControl:
    """Dubins-car primitive: constant speed v0, turn rate omega0, and a
    discrete steering input u in {-1, 0, 1} (right, straight, left)."""

    v0: float
    omega0: float
    u: int

    def __post_init__(self) -> None:
        if self.v0 < 0.0 or self.omega0 < 0.0:
            raise ValueError("v0 and omega0 must be non-negative")
        if self.u not in (-1, 0, 1):
            raise ValueError("u must be one of -1, 0, 1")


def ddr_derivative(
    pose: Pose2D, thrust: WheelThrust, params: VehicleParams
) -> tuple[float, float, float]:
    """Configuration transition rates (dx, dy, dtheta) for the given thrust.

    Thrusts are scaled to wheel angular speeds by max_wheel_rate before the
    transition equation is evaluated.
    """
    u_l = thrust.u_left * params.max_wheel_rate
    u_r = thrust.u_right * params.max_wheel_rate
    r = params.wheel_radius_r
    v = 0.5 * r * (u_l + u_r)
    return (
        v * math.cos(pose.theta),
        v * math.sin(pose.theta),
        (r / params.axle_length_L) * (u_r - u_l),
    )


MAX_STEP_DT = 0.1


def integrate(pose: Pose2D, thrust: WheelThrust, params: VehicleParams, dt: float) -> Pose2D:
    """One classical RK4 step of the transition equation.

    dt must lie in (0, 0.1] s; larger steps are rejected to guard against
    gross integration error.
    """
    if not 0.0 < dt <= MAX_STEP_DT:
        raise ValueError(f"dt must be in (0, {MAX_STEP_DT}], got {dt}")

    def deriv(x: float, y: float, th: float) -> tuple[float, float, float]:
        u_l = thrust.u_left * params.max_wheel_rate
        u_r = thrust.u_right * params.max_wheel_rate
        r = params.wheel_radius_r
        v = 0.5 * r * (u_l + u_r)
        return v * math.cos(th), v * math.sin(th), (r / params.axle_length_L) * (u_r - u_l)

    x0, y0, th0 = pose.x, pose.y, pose.theta
    k1 = deriv(x0, y0, th0)
    k2 = deriv(x0 + 0.5 * dt * k1[0], y0 + 0.5 * dt * k1[1], th0 + 0.5 * dt * k1[2])
    k3 = deriv(x0 + 0.5 * dt * k2[0], y0 + 0.5 * dt * k2[1], th0 + 0.5 * dt * k2[2])
    k4 = deriv(x0 + dt * k3[0], y0 + dt * k3[1], th0 + dt * k3[2])
    return Pose2D(
        x0 + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y0 + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        th0 + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )


def constant_thrust_closed_form(
    pose: Pose2D, thrust: WheelThrust, params: VehicleParams, t: float
) -> Pose2D:
    """Exact pose after holding a constant thrust for t seconds.

    Equal thrusts give a straight segment; otherwise the axle midpoint
    rotates about the instantaneous center of curvature, at signed radius
    R = (L/2)(u_r + u_l)/(u_r - u_l) to the vehicle's left.
    """
    if t < 0.0:
        raise ValueError("t must be non-negative")
    u_l = thrust.u_left * params.max_wheel_rate
    u_r = thrust.u_right * params.max_wheel_rate
    r = params.wheel_radius_r
    v = 0.5 * r * (u_l + u_r)
    omega = (r / params.axle_length_L) * (u_r - u_l)
    if omega == 0.0:
        return Pose2D(
            pose.x + v * t * math.cos(pose.theta),
            pose.y + v * t * math.sin(pose.theta),
            pose.theta,
        )
    radius = v / omega
    # ICC sits at signed distance `radius` along the body-left axis.
    cx = pose.x - radius * math.sin(pose.theta)
    cy = pose.y + radius * math.cos(pose.theta)
    th = pose.theta + omega * t
    return Pose2D(cx + radius * math.sin(th), cy - radius * math.cos(th), th)


def twist_to_thrust(twist: Twist2D, params: VehicleParams) -> WheelThrust:
    """Invert the transition equation: (v, omega) -> wheel thrusts.

    If either wheel would exceed |1| the pair is scaled down uniformly so
    the faster wheel sits at +/-1.  Uniform scaling preserves the commanded
    curvature omega/v at reduced speed.
    """
    r = params.wheel_radius_r
    half_l = 0.5 * params.axle_length_L
    u_r = (twist.v + twist.omega * half_l) / r / params.max_wheel_rate
    u_l = (twist.v - twist.omega * half_l) / r / params.max_wheel_rate
    peak = max(abs(u_l), abs(u_r))
    if peak > 1.0:
        u_l /= peak
        u_r /= peak
    return WheelThrust(u_l, u_r)


def dubins_to_thrust(ctrl: DubinsControl, params: VehicleParams) -> WheelThrust:
    """Map a Dubins-car primitive to wheel thrusts."""
    return twist_to_thrust(Twist2D(ctrl.v0, ctrl.omega0 * ctrl.u), params)
