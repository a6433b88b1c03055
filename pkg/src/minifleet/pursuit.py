"""Pure-pursuit path following with schedule synchronization.

The follower chases a lookahead point: the first intersection of the
circle of radius ell around the vehicle with the path polyline.  The
circle through the vehicle and that point, tangent to the current heading,
has curvature 2*y_local/d^2, which converts to a wheel-thrust pair under a
configurable thrust cap (default 70% of maximum).  The reserved headroom
above the cap is what lets a vehicle that has fallen behind its timestamp
schedule catch up: a proportional law on scheduled-arclength error scales
the cap up to at most 1/cap (full thrust) or down to a full stop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .paths import TimedPath
from .vehicle import Pose2D, VehicleParams, WheelThrust

MIN_TARGET_DISTANCE = 1e-9


@dataclass(frozen=True)
class PursuitConfig:
    lookahead_ell: float = 0.12
    cap_fraction: float = 0.7
    base_thrust: float = 0.7
    sync_gain_k: float = 4.0
    goal_tolerance: float = 0.03

    def __post_init__(self) -> None:
        if self.lookahead_ell <= 0.0:
            raise ValueError("lookahead_ell must be positive")
        if not 0.0 < self.cap_fraction <= 1.0:
            raise ValueError("cap_fraction must be in (0, 1]")
        if not 0.0 < self.base_thrust <= self.cap_fraction:
            raise ValueError("base_thrust must be in (0, cap_fraction]")
        if self.sync_gain_k < 0.0:
            raise ValueError("sync_gain_k must be non-negative")
        if self.goal_tolerance <= 0.0:
            raise ValueError("goal_tolerance must be positive")


@dataclass(frozen=True)
class FollowState:
    """Per-vehicle follow session: the path plus monotone segment progress."""

    path: TimedPath
    progress_index: int = 0
    done: bool = False


def lookahead_point(
    path: TimedPath, pose: Pose2D, ell: float, from_index: int
) -> tuple[tuple[float, float], int]:
    """First intersection, at or after segment from_index, of the lookahead
    circle with the polyline.

    Within a segment the forward (larger-parameter) intersection is taken,
    so a vehicle sitting on the path looks ahead rather than behind.  If no
    intersection exists ahead, the final waypoint is returned.  The
    returned segment index never decreases, which stops the target from
    being recaptured by earlier lobes of a self-crossing path.
    """
    if ell <= 0.0:
        raise ValueError("ell must be positive")
    wps = path.waypoints
    n_seg = len(wps) - 1
    if not 0 <= from_index <= n_seg:
        raise ValueError(f"from_index {from_index} out of range")
    for i in range(min(from_index, n_seg - 1), n_seg):
        a, b = wps[i], wps[i + 1]
        dx, dy = b.x - a.x, b.y - a.y
        fx, fy = a.x - pose.x, a.y - pose.y
        qa = dx * dx + dy * dy
        if qa < MIN_TARGET_DISTANCE**2:
            continue
        qb = 2.0 * (fx * dx + fy * dy)
        qc = fx * fx + fy * fy - ell * ell
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0.0:
            continue
        root = (-qb + math.sqrt(disc)) / (2.0 * qa)
        if 0.0 <= root <= 1.0:
            return (a.x + root * dx, a.y + root * dy), i
    last = wps[-1]
    return (last.x, last.y), n_seg - 1


def pursuit_curvature(pose: Pose2D, target: tuple[float, float]) -> float:
    """Curvature of the circle through vehicle and target, tangent to the
    heading: kappa = 2*y_local/d^2.  Positive curvature turns left."""
    dx = target[0] - pose.x
    dy = target[1] - pose.y
    d2 = dx * dx + dy * dy
    if d2 < MIN_TARGET_DISTANCE**2:
        raise ValueError("target coincides with vehicle position")
    y_local = -math.sin(pose.theta) * dx + math.cos(pose.theta) * dy
    return 2.0 * y_local / d2


def curvature_to_thrust(
    kappa: float, speed_scale: float, cfg: PursuitConfig, params: VehicleParams
) -> WheelThrust:
    """Thrust pair realizing the commanded curvature.

    The wheels keep the exact differential-drive ratio
    u_r/u_l = (2 + kappa*L)/(2 - kappa*L) and the faster wheel runs at
    min(1, cap_fraction * speed_scale).  Past |kappa*L| = 2 the inner wheel
    reverses and the vehicle pivots.
    """
    if speed_scale < 0.0 or speed_scale > 1.0 / cfg.cap_fraction + 1e-12:
        raise ValueError("speed_scale must be in [0, 1/cap_fraction]")
    kl = kappa * params.axle_length_L
    right = 2.0 + kl
    left = 2.0 - kl
    peak = max(abs(left), abs(right))
    magnitude = min(1.0, cfg.cap_fraction * speed_scale)
    return WheelThrust(left / peak * magnitude, right / peak * magnitude)


def sync_scale(
    path: TimedPath,
    pose: Pose2D,
    now: float,
    cfg: PursuitConfig,
    first: int = 0,
    last: int | None = None,
) -> float:
    """Speed scale from scheduled-arclength error, clamped to [0, 1/cap].

    Behind schedule -> above 1 (uses the cap headroom); ahead -> below 1,
    down to a full stop.  [first, last] restricts the segments the vehicle
    is projected onto; the follower passes its progress window so that a
    self-revisiting path (e.g. repeated laps) measures progress on the
    current pass, not an earlier one.
    """
    if last is None:
        last = len(path.waypoints) - 2
    target_s = path.scheduled_arclength(now)
    actual_s = path.project_arclength(pose.x, pose.y, first, last)
    scale = 1.0 + cfg.sync_gain_k * (target_s - actual_s)
    return min(1.0 / cfg.cap_fraction, max(0.0, scale))


def _backed_up_index(path: TimedPath, index: int, distance: float) -> int:
    """Largest segment index at least `distance` of arclength behind `index`."""
    target_s = path.arclengths[index] - distance
    while index > 0 and path.arclengths[index] > target_s:
        index -= 1
    return index


def follow_step(
    state: FollowState,
    pose: Pose2D,
    now: float,
    cfg: PursuitConfig,
    params: VehicleParams,
) -> tuple[WheelThrust, FollowState]:
    """One control step: lookahead -> curvature -> sync scale -> thrusts.

    Returns zero thrust and a done state once the vehicle is within
    goal_tolerance of the final waypoint with no lookahead target ahead.
    """
    if state.done:
        raise ValueError("follow session already done")
    path = state.path
    last = path.waypoints[-1]
    # scan from slightly behind the committed progress: sensor noise can put
    # the forward intersection a hair before the committed segment, and a
    # strict scan would then skip ahead to the next lobe of the path
    scan_from = _backed_up_index(path, state.progress_index, 0.5 * cfg.lookahead_ell)
    target, idx = lookahead_point(path, pose, cfg.lookahead_ell, scan_from)
    idx = max(idx, state.progress_index)
    goal_dist = math.hypot(last.x - pose.x, last.y - pose.y)
    target_is_end = math.hypot(target[0] - last.x, target[1] - last.y) < MIN_TARGET_DISTANCE
    if target_is_end and goal_dist <= max(cfg.goal_tolerance, 0.0):
        return WheelThrust(0.0, 0.0), replace(state, progress_index=idx, done=True)
    target_dist = math.hypot(target[0] - pose.x, target[1] - pose.y)
    if target_dist < MIN_TARGET_DISTANCE:
        # sitting exactly on the final waypoint
        return WheelThrust(0.0, 0.0), replace(state, progress_index=idx, done=True)
    dx = target[0] - pose.x
    dy = target[1] - pose.y
    x_local = math.cos(pose.theta) * dx + math.sin(pose.theta) * dy
    if x_local < 0.0:
        # target astern: the tangent-circle curvature vanishes as the target
        # approaches dead astern, which would drive the vehicle straight away
        # from its path; pivot toward the target instead (ties break left so
        # an exactly collinear reversal still turns)
        y_local = -math.sin(pose.theta) * dx + math.cos(pose.theta) * dy
        turn = 1.0 if y_local >= 0.0 else -1.0
        kappa = turn * 4.0 / params.axle_length_L  # |kappa * L| > 2: pivots
    else:
        kappa = pursuit_curvature(pose, target)
    scale = sync_scale(path, pose, now, cfg, first=scan_from, last=idx)
    thrust = curvature_to_thrust(kappa, scale, cfg, params)
    return thrust, replace(state, progress_index=idx)
