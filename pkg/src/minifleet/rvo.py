"""Reciprocal collision avoidance in the half-plane (ORCA) formulation.

Each neighbor induces one linear constraint in velocity space: the minimal
change u that pushes the relative velocity out of the truncated
velocity-obstacle cone of horizon tau, split half/half between the two
agents (equal responsibility).  The new velocity is the point of the
constraint intersection (capped to the max-speed disc) closest to the
agent's preferred velocity, found by an incremental two-dimensional linear
program with boundary backtracking; when the intersection is empty the
velocity minimizing the worst violation is returned instead.

All agents are stepped from the same immutable snapshot, and a short
forward rollout converts the solved velocities into timed waypoint paths
that the pure-pursuit follower can track.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .paths import TimedPath, Waypoint

EPSILON = 1e-10
MIN_SEPARATION = 1e-9


@dataclass(frozen=True)
class AgentState:
    id: int
    position: tuple[float, float]
    velocity: tuple[float, float]
    radius: float
    pref_velocity: tuple[float, float]
    max_speed: float

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        if self.max_speed <= 0.0:
            raise ValueError("max_speed must be positive")


@dataclass(frozen=True)
class HalfPlane:
    """Feasible set {v : (v - point) . normal >= 0} in velocity space."""

    point: tuple[float, float]
    normal: tuple[float, float]

    def __post_init__(self) -> None:
        n = math.hypot(*self.normal)
        if abs(n - 1.0) > 1e-9:
            raise ValueError("normal must be a unit vector")

    @property
    def direction(self) -> tuple[float, float]:
        """Boundary direction with the feasible side on its left."""
        return (self.normal[1], -self.normal[0])


def _det(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * by - ay * bx


def orca_halfplanes(
    agent: AgentState, neighbors: list[AgentState], tau: float, dt: float
) -> list[HalfPlane]:
    """One reciprocal constraint per neighbor.

    Neighbors beyond (|v_a|+|v_b|)*tau + r_a + r_b cannot interact within
    the horizon and are pruned.  Pairs already in collision fall back to
    the dt-horizon escape constraint.
    """
    if tau <= 0.0 or dt <= 0.0:
        raise ValueError("tau and dt must be positive")
    planes: list[HalfPlane] = []
    ax, ay = agent.position
    avx, avy = agent.velocity
    for other in neighbors:
        rel_x = other.position[0] - ax
        rel_y = other.position[1] - ay
        dist = math.hypot(rel_x, rel_y)
        if dist < MIN_SEPARATION:
            raise ValueError(f"agents {agent.id} and {other.id} coincide")
        comb_r = agent.radius + other.radius
        # sound pruning: even at top speed the pair cannot touch within tau
        reach = (agent.max_speed + other.max_speed) * tau + comb_r
        if dist > reach:
            continue
        rvx = avx - other.velocity[0]
        rvy = avy - other.velocity[1]
        dist_sq = dist * dist
        comb_r_sq = comb_r * comb_r
        if dist_sq > comb_r_sq:
            # w: from the truncation-disc center to the relative velocity
            wx = rvx - rel_x / tau
            wy = rvy - rel_y / tau
            w_len_sq = wx * wx + wy * wy
            dot1 = wx * rel_x + wy * rel_y
            if dot1 < 0.0 and dot1 * dot1 > comb_r_sq * w_len_sq:
                # project onto the truncation disc
                w_len = math.sqrt(w_len_sq)
                uwx, uwy = wx / w_len, wy / w_len
                dir_x, dir_y = uwy, -uwx
                scale = comb_r / tau - w_len
                ux, uy = scale * uwx, scale * uwy
            else:
                # project onto the nearer cone leg
                leg = math.sqrt(dist_sq - comb_r_sq)
                if _det(rel_x, rel_y, wx, wy) > 0.0:
                    dir_x = (rel_x * leg - rel_y * comb_r) / dist_sq
                    dir_y = (rel_x * comb_r + rel_y * leg) / dist_sq
                else:
                    dir_x = -(rel_x * leg + rel_y * comb_r) / dist_sq
                    dir_y = -(-rel_x * comb_r + rel_y * leg) / dist_sq
                dot2 = rvx * dir_x + rvy * dir_y
                ux = dot2 * dir_x - rvx
                uy = dot2 * dir_y - rvy
        else:
            # already overlapping: push apart within one time step
            inv_dt = 1.0 / dt
            wx = rvx - rel_x * inv_dt
            wy = rvy - rel_y * inv_dt
            w_len = math.hypot(wx, wy)
            if w_len < EPSILON:
                uwx, uwy = -rel_x / dist, -rel_y / dist
            else:
                uwx, uwy = wx / w_len, wy / w_len
            dir_x, dir_y = uwy, -uwx
            scale = comb_r * inv_dt - w_len
            ux, uy = scale * uwx, scale * uwy
        point = (avx + 0.5 * ux, avy + 0.5 * uy)
        normal = (-dir_y, dir_x)
        planes.append(HalfPlane(point=point, normal=normal))
    return planes


def _lp1(lines, line_no, radius, opt, direction_opt, result):
    """Optimize along the boundary of line `line_no` subject to lines[:line_no]
    and the speed disc.  Returns the new result or None if infeasible."""
    px, py = lines[line_no].point
    dx, dy = lines[line_no].direction
    dot = px * dx + py * dy
    disc = dot * dot + radius * radius - (px * px + py * py)
    if disc < 0.0:
        return None
    sqrt_disc = math.sqrt(disc)
    t_left = -dot - sqrt_disc
    t_right = -dot + sqrt_disc
    for i in range(line_no):
        idx, idy = lines[i].direction
        ipx, ipy = lines[i].point
        denom = _det(dx, dy, idx, idy)
        numer = _det(idx, idy, px - ipx, py - ipy)
        if abs(denom) <= EPSILON:
            if numer < 0.0:
                return None
            continue
        t = numer / denom
        if denom >= 0.0:
            t_right = min(t_right, t)
        else:
            t_left = max(t_left, t)
        if t_left > t_right:
            return None
    if direction_opt:
        if opt[0] * dx + opt[1] * dy > 0.0:
            t = t_right
        else:
            t = t_left
    else:
        t = dx * (opt[0] - px) + dy * (opt[1] - py)
        t = min(t_right, max(t_left, t))
    return (px + t * dx, py + t * dy)


def _lp2(lines, radius, opt, direction_opt, result):
    """Incremental LP: returns (index of first failing line or len(lines),
    result)."""
    if direction_opt:
        result = (opt[0] * radius, opt[1] * radius)
    elif opt[0] * opt[0] + opt[1] * opt[1] > radius * radius:
        norm = math.hypot(*opt)
        result = (opt[0] / norm * radius, opt[1] / norm * radius)
    else:
        result = opt
    for i, line in enumerate(lines):
        dx, dy = line.direction
        if _det(dx, dy, line.point[0] - result[0], line.point[1] - result[1]) > 0.0:
            new = _lp1(lines, i, radius, opt, direction_opt, result)
            if new is None:
                return i, result
            result = new
    return len(lines), result


def _lp3(lines, begin_line, radius, result):
    """Infeasible fallback: minimize the maximum constraint violation."""
    distance = 0.0
    for i in range(begin_line, len(lines)):
        dx, dy = lines[i].direction
        if _det(dx, dy, lines[i].point[0] - result[0], lines[i].point[1] - result[1]) > distance:
            proj: list[HalfPlane] = []
            for j in range(i):
                jdx, jdy = lines[j].direction
                denom = _det(dx, dy, jdx, jdy)
                if abs(denom) <= EPSILON:
                    if dx * jdx + dy * jdy > 0.0:
                        continue
                    point = (
                        0.5 * (lines[i].point[0] + lines[j].point[0]),
                        0.5 * (lines[i].point[1] + lines[j].point[1]),
                    )
                else:
                    t = _det(jdx, jdy, lines[i].point[0] - lines[j].point[0],
                             lines[i].point[1] - lines[j].point[1]) / denom
                    point = (lines[i].point[0] + t * dx, lines[i].point[1] + t * dy)
                ndx, ndy = jdx - dx, jdy - dy
                norm = math.hypot(ndx, ndy)
                direction = (ndx / norm, ndy / norm)
                proj.append(HalfPlane(point=point, normal=(-direction[1], direction[0])))
            temp = result
            fail, result = _lp2(proj, radius, (-dy, dx), True, result)
            if fail < len(proj):
                result = temp
            distance = _det(dx, dy, lines[i].point[0] - result[0], lines[i].point[1] - result[1])
    return result


def solve_velocity(
    halfplanes: list[HalfPlane], pref: tuple[float, float], max_speed: float
) -> tuple[float, float]:
    """Closest velocity to pref inside all half-planes and the speed disc.

    If the intersection is empty, returns the velocity minimizing the
    maximum violation.  Total on all inputs.
    """
    if max_speed <= 0.0:
        raise ValueError("max_speed must be positive")
    fail, result = _lp2(halfplanes, max_speed, pref, False, pref)
    if fail < len(halfplanes):
        result = _lp3(halfplanes, fail, max_speed, result)
    return result


def rvo_step(
    agents: list[AgentState], tau: float, dt: float
) -> list[tuple[float, float]]:
    """New velocity for every agent, all computed from the same snapshot."""
    out = []
    for agent in agents:
        neighbors = [a for a in agents if a.id != agent.id]
        planes = orca_halfplanes(agent, neighbors, tau, dt)
        out.append(solve_velocity(planes, agent.pref_velocity, agent.max_speed))
    return out


def _aim(position, goal, max_speed, dt):
    gx, gy = goal[0] - position[0], goal[1] - position[1]
    dist = math.hypot(gx, gy)
    if dist < MIN_SEPARATION:
        return (0.0, 0.0)
    speed = min(max_speed, dist / dt)
    return (gx / dist * speed, gy / dist * speed)


def velocities_to_timed_paths(
    agents: list[AgentState],
    tau: float,
    dt: float,
    k_steps: int,
    goals: list[tuple[float, float]] | None = None,
) -> list[TimedPath]:
    """Roll the avoidance forward k_steps and emit per-agent timed paths.

    Timestamps are 0, dt, ..., k_steps*dt for every agent.  When goals are
    given, each agent's preferred velocity is re-aimed at its goal every
    step (speed-clamped, easing in for exact arrival); otherwise the given
    preferred velocities are held.
    """
    if k_steps < 1:
        raise ValueError("k_steps must be >= 1")
    current = list(agents)
    trails: list[list[Waypoint]] = [
        [Waypoint(a.position[0], a.position[1], 0.0)] for a in current
    ]
    for k in range(1, k_steps + 1):
        velocities = rvo_step(current, tau, dt)
        moved = []
        for idx, (a, (vx, vy)) in enumerate(zip(current, velocities)):
            pos = (a.position[0] + vx * dt, a.position[1] + vy * dt)
            if goals is not None:
                pref = _aim(pos, goals[idx], a.max_speed, dt)
            else:
                pref = a.pref_velocity
            moved.append(
                AgentState(
                    id=a.id,
                    position=pos,
                    velocity=(vx, vy),
                    radius=a.radius,
                    pref_velocity=pref,
                    max_speed=a.max_speed,
                )
            )
        current = moved
        for trail, a in zip(trails, current):
            trail.append(Waypoint(a.position[0], a.position[1], k * dt))
    return [TimedPath(trail) for trail in trails]
