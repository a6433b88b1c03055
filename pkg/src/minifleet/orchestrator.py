"""Closed-loop scenario driver with deterministic record/replay.

Each tick runs the platform loop: observe (noisy, frame-gated poses only;
the controller never reads ground truth) -> scenario-specific planning ->
one pure-pursuit step per vehicle -> encode and send thrusts over the
lossy star link -> advance the world by 1/loop_hz of simulated time.
Commands are re-sent every tick, which is the software compensation for
link drops; a debug flag turns re-sending off to make the effect of an
uncompensated link measurable.

Everything is keyed off (config, seed): running a scenario twice yields
byte-identical logs, and `replay` re-executes a log's header config and
reports the first divergence, if any.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import random
import time
from dataclasses import dataclass, field

from . import __version__
from .hexgrid import build_hex_grid, snap_to_grid
from .paths import TimedPath, Waypoint, load_polylines, timestamp_polyline
from .planner import MultiRobotProblem, plan_min_max_dist, plan_to_timed_paths
from .pursuit import FollowState, PursuitConfig, follow_step
from .rvo import AgentState, velocities_to_timed_paths
from .vehicle import DEFAULT_PARAMS, Pose2D, VehicleParams, WheelThrust
from .wire import (
    DelayLine,
    LinkConfig,
    PoseFrame,
    PosePublisher,
    ThrustFrame,
    decode_thrust_frame,
    encode_thrust_frame,
    lossy_send,
)
from .world import SensorModel, World

logger = logging.getLogger(__name__)

SCENARIOS = ("follow_drawn", "sync_circle", "minmax_hex", "rvo_swap")

#: commanded thrusts below this magnitude count as stationary in assertions
NOISE_DEADBAND = 0.02


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    vehicle_count: int = 1
    loop_hz: float = 30.0
    seed: int = 0
    arena: tuple[float, float] = (1.5, 0.9)
    vehicle: VehicleParams = DEFAULT_PARAMS
    pursuit: PursuitConfig = PursuitConfig()
    sensor: SensorModel = SensorModel()
    link: LinkConfig = LinkConfig()
    rate_scales: tuple[tuple[int, float], ...] = ()
    nominal_speed: float = 0.12
    clearance_factor: float = 3.0
    circle_radius: float = 0.3
    circle_laps: int = 2
    rvo_tau: float = 2.0
    rvo_dt: float = 0.1
    rvo_k_steps: int = 8
    rvo_radius_margin: float = 1.6
    rvo_stagger: float = 0.02
    tick_budget_s: float = 120.0
    resend_every_tick: bool = True
    #: commanded percents move only when the target drifts further than this
    #: (serial-churn hysteresis); a commanded full stop always passes through
    command_hysteresis_pct: int = 2
    paths_file: str | None = None
    drawn_paths: tuple[tuple[tuple[float, float], ...], ...] = ()

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ScenarioError(f"unknown scenario {self.scenario!r}")
        if self.vehicle_count < 1:
            raise ScenarioError("vehicle_count must be >= 1")
        if not 10.0 <= self.loop_hz <= 100.0:
            raise ScenarioError("loop_hz must be in [10, 100]")
        if self.loop_hz > 2.0 * self.sensor.fps:
            logger.warning(
                "control loop at %g Hz outruns sensing at %g fps",
                self.loop_hz,
                self.sensor.fps,
            )

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["vehicle"] = dataclasses.asdict(self.vehicle)
        d["pursuit"] = dataclasses.asdict(self.pursuit)
        d["sensor"] = dataclasses.asdict(self.sensor)
        d["link"] = dataclasses.asdict(self.link)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        d["arena"] = tuple(d["arena"])
        d["vehicle"] = VehicleParams(**d["vehicle"])
        d["pursuit"] = PursuitConfig(**d["pursuit"])
        d["sensor"] = SensorModel(**d["sensor"])
        d["link"] = LinkConfig(**d["link"])
        d["rate_scales"] = tuple((int(i), float(s)) for i, s in d.get("rate_scales", ()))
        d["drawn_paths"] = tuple(
            tuple((float(x), float(y)) for x, y in poly) for poly in d.get("drawn_paths", ())
        )
        return cls(**d)


@dataclass
class RunLog:
    header: dict
    ticks: list[dict] = field(default_factory=list)
    complete: bool = False

    def to_ndjson(self) -> str:
        lines = [json.dumps({"kind": "header", **self.header}, separators=(",", ":"), sort_keys=True)]
        for rec in self.ticks:
            lines.append(json.dumps({"kind": "tick", **rec}, separators=(",", ":"), sort_keys=True))
        lines.append(
            json.dumps({"kind": "end", "complete": self.complete}, separators=(",", ":"))
        )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_ndjson(cls, text: str) -> "RunLog":
        header = None
        ticks = []
        complete = False
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.pop("kind")
            if kind == "header":
                header = rec
            elif kind == "tick":
                ticks.append(rec)
            elif kind == "end":
                complete = rec["complete"]
        if header is None:
            raise ValueError("log has no header line")
        return cls(header=header, ticks=ticks, complete=complete)


def estimate_velocity(prev: PoseFrame, curr: PoseFrame, vehicle_id: int) -> tuple[float, float]:
    """Two-frame finite difference of a vehicle's position."""
    if curr.t <= prev.t:
        raise ValueError("curr frame must be later than prev")
    try:
        px, py, _ = prev.get(vehicle_id)
        cx, cy, _ = curr.get(vehicle_id)
    except KeyError:
        raise KeyError(f"vehicle {vehicle_id} missing from a frame") from None
    dt = curr.t - prev.t
    return ((cx - px) / dt, (cy - py) / dt)


def _shift_path(path: TimedPath, offset: float) -> TimedPath:
    return TimedPath(Waypoint(w.x, w.y, w.t + offset) for w in path.waypoints)


def _circle_path(center, radius, phase, laps, nominal_speed, points_per_lap=96):
    wps = []
    total = laps * points_per_lap
    seg_len = 2.0 * math.pi * radius / points_per_lap
    for k in range(total + 1):
        ang = phase + 2.0 * math.pi * k / points_per_lap
        wps.append(
            Waypoint(
                center[0] + radius * math.cos(ang),
                center[1] + radius * math.sin(ang),
                k * seg_len / nominal_speed,
            )
        )
    return TimedPath(wps)


class _Fleet:
    """Mutable per-run control state shared by the scenario strategies."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.states: dict[int, FollowState | None] = {}
        self.goals: dict[int, tuple[float, float]] = {}
        self.last_seen: dict[int, tuple[float, float, float]] = {}
        self.prev_frame: PoseFrame | None = None
        self.completed = False

    def all_done(self) -> bool:
        if self.cfg.scenario == "rvo_swap":
            # rollout segments end far from the goals; only goal arrival counts
            return self.completed
        return bool(self.states) and all(
            s is not None and s.done for s in self.states.values()
        )


def run_scenario(
    cfg: ScenarioConfig,
    publisher: PosePublisher | None = None,
    pace: bool = False,
) -> RunLog:
    """Execute one scenario to completion (or tick budget) and return the log.

    `pace` sleeps each tick to wall clock for live viewing; it never
    affects the log contents (simulated time is the only time base).
    """
    rng = random.Random(cfg.seed)
    world = World(arena=cfg.arena, rng_seed=rng.randrange(2**31))
    link_rng = random.Random(rng.randrange(2**31))
    scenario_rng = random.Random(rng.randrange(2**31))
    rate_scales = dict(cfg.rate_scales)

    fleet = _Fleet(cfg)
    _setup_scenario(cfg, world, fleet, scenario_rng, rate_scales)

    log = RunLog(
        header={
            "config": cfg.to_dict(),
            "seed": cfg.seed,
            "version": __version__,
        }
    )
    dt = 1.0 / cfg.loop_hz
    max_ticks = int(round(cfg.tick_budget_s * cfg.loop_hz))
    delay = DelayLine(latency=cfg.link.latency)
    last_cmd: dict[int, tuple[int, int]] = {}
    last_sent: dict[int, tuple[int, int]] = {}

    for tick in range(max_ticks):
        if pace:
            time.sleep(dt)
        now = tick * dt
        frame = world.observe(cfg.sensor)
        if publisher is not None:
            publisher.publish(frame)
        for vid, x, y, th in frame.poses:
            fleet.last_seen[vid] = (x, y, th)

        _update_scenario(cfg, fleet, frame, now)

        thrusts: dict[int, WheelThrust] = {}
        for vid in sorted(fleet.states):
            state = fleet.states[vid]
            if state is None or state.done or vid not in fleet.last_seen:
                thrusts[vid] = WheelThrust(0.0, 0.0)
                continue
            x, y, th = fleet.last_seen[vid]
            thrust, new_state = follow_step(
                state, Pose2D(x, y, th), now, cfg.pursuit, cfg.vehicle
            )
            fleet.states[vid] = new_state
            thrusts[vid] = thrust

        frames = []
        for vid, t in sorted(thrusts.items()):
            left, right = round(t.u_left * 100), round(t.u_right * 100)
            held = last_cmd.get(vid)
            if (
                held is not None
                and (left, right) != (0, 0)
                and max(abs(left - held[0]), abs(right - held[1]))
                <= cfg.command_hysteresis_pct
            ):
                left, right = held
            last_cmd[vid] = (left, right)
            frames.append(ThrustFrame(vid, left, right))
        if not cfg.resend_every_tick:
            frames = [
                f
                for f in frames
                if last_sent.get(f.vehicle_id) != (f.left_pct, f.right_pct)
            ]
        for f in frames:
            last_sent[f.vehicle_id] = (f.left_pct, f.right_pct)

        # the frames really cross the wire: encode, drop, decode
        survivors = lossy_send(frames, cfg.link, rng=link_rng)
        decoded = []
        for f in survivors:
            df, _ = decode_thrust_frame(encode_thrust_frame(f))
            decoded.append(df)
        delay.push(now, decoded)
        due = delay.pop_due(now)

        events_before = len(world.overlap_events)
        world.tick(due, dt)
        new_events = world.overlap_events[events_before:]

        log.ticks.append(
            {
                "tick": tick,
                "t": round(now, 9),
                "poses": [
                    [vid, world.vehicles[vid].pose.x, world.vehicles[vid].pose.y,
                     world.vehicles[vid].pose.theta]
                    for vid in sorted(world.vehicles)
                ],
                "thrusts": [
                    [f.vehicle_id, f.left_pct, f.right_pct] for f in frames
                ],
                "events": [[round(t, 9), a, b] for t, a, b in new_events],
            }
        )
        if fleet.all_done():
            log.complete = True
            break
    return log


def _setup_scenario(cfg, world, fleet, rng, rate_scales):
    params = cfg.vehicle
    n = cfg.vehicle_count

    if cfg.scenario == "sync_circle":
        center = (cfg.arena[0] / 2.0, cfg.arena[1] / 2.0)
        radius = cfg.circle_radius
        if radius + params.body_radius >= min(center):
            raise ScenarioError("circle does not fit in the arena")
        for i in range(n):
            phase = 2.0 * math.pi * i / n
            pose = Pose2D(
                center[0] + radius * math.cos(phase),
                center[1] + radius * math.sin(phase),
                phase + math.pi / 2.0,
            )
            world.add_vehicle(i, pose, params, rate_scales.get(i, 1.0))
            path = _circle_path(center, radius, phase, cfg.circle_laps, cfg.nominal_speed)
            fleet.states[i] = FollowState(path=path)

    elif cfg.scenario == "follow_drawn":
        polylines = [list(p) for p in cfg.drawn_paths]
        if cfg.paths_file:
            polylines = load_polylines(cfg.paths_file) + polylines
        if len(polylines) < n:
            raise ScenarioError(
                f"{n} vehicles but only {len(polylines)} drawn paths"
            )
        for i in range(n):
            path = timestamp_polyline(polylines[i], cfg.nominal_speed)
            a, b = path.waypoints[0], path.waypoints[1]
            heading = math.atan2(b.y - a.y, b.x - a.x)
            world.add_vehicle(i, Pose2D(a.x, a.y, heading), params, rate_scales.get(i, 1.0))
            fleet.states[i] = FollowState(path=path)

    elif cfg.scenario == "minmax_hex":
        grid = build_hex_grid(cfg.arena, params, cfg.clearance_factor)
        if n > len(grid.vertices):
            raise ScenarioError("more vehicles than grid vertices")
        start_vertices = rng.sample(range(len(grid.vertices)), n)
        for i, v in enumerate(start_vertices):
            x, y = grid.vertices[v]
            world.add_vehicle(i, Pose2D(x, y, 0.0), params, rate_scales.get(i, 1.0))
        starts = snap_to_grid(grid, [world.vehicles[i].pose for i in range(n)])
        goals = rng.sample(range(len(grid.vertices)), n)
        problem = MultiRobotProblem(grid=grid, starts=tuple(starts), goals=tuple(goals))
        plan = plan_min_max_dist(problem)
        for i, path in enumerate(plan_to_timed_paths(plan, grid, cfg.nominal_speed)):
            fleet.states[i] = FollowState(path=path)
            # face the first leg of the plan so tracking starts aligned
            for w in path.waypoints[1:]:
                a = path.waypoints[0]
                if math.hypot(w.x - a.x, w.y - a.y) > 1e-9:
                    world.vehicles[i].pose = Pose2D(
                        a.x, a.y, math.atan2(w.y - a.y, w.x - a.x)
                    )
                    break

    elif cfg.scenario == "rvo_swap":
        center = (cfg.arena[0] / 2.0, cfg.arena[1] / 2.0)
        radius = cfg.circle_radius
        for i in range(n):
            phase = 2.0 * math.pi * i / n
            # stagger the start radii: an exactly symmetric swap is a stable
            # deadlock of the reciprocal construction (every agent's LP pins
            # to the same mirror-symmetric vertex), so desynchronize arrivals
            r_i = radius * (1.0 + cfg.rvo_stagger * ((i % 3) - 1))
            pose = Pose2D(
                center[0] + r_i * math.cos(phase),
                center[1] + r_i * math.sin(phase),
                phase + math.pi,
            )
            world.add_vehicle(i, pose, params, rate_scales.get(i, 1.0))
            fleet.goals[i] = (
                center[0] + radius * math.cos(phase + math.pi),
                center[1] + radius * math.sin(phase + math.pi),
            )
            fleet.states[i] = None  # planned on the first tick
        fleet.next_replan = 0.0


def _update_scenario(cfg, fleet, frame, now):
    if cfg.scenario != "rvo_swap":
        return
    segments_done = all(s is not None and s.done for s in fleet.states.values())
    if now + 1e-12 < getattr(fleet, "next_replan", math.inf) and not segments_done:
        return
    # alternate: plan a short avoidance rollout, then track it with pursuit
    agents = []
    tol = cfg.pursuit.goal_tolerance
    all_arrived = True
    for vid in sorted(fleet.states):
        if vid not in fleet.last_seen:
            return  # wait for full visibility before replanning
        x, y, _ = fleet.last_seen[vid]
        goal = fleet.goals[vid]
        if math.hypot(goal[0] - x, goal[1] - y) > tol:
            all_arrived = False
        if fleet.prev_frame is not None:
            try:
                vel = estimate_velocity(fleet.prev_frame, frame, vid)
            except (KeyError, ValueError):
                vel = (0.0, 0.0)
        else:
            vel = (0.0, 0.0)
        max_speed = cfg.vehicle.max_speed * cfg.pursuit.cap_fraction
        gx, gy = goal[0] - x, goal[1] - y
        dist = math.hypot(gx, gy)
        if dist > 1e-9:
            speed = min(max_speed, dist / (cfg.rvo_k_steps * cfg.rvo_dt))
            pref = (gx / dist * speed, gy / dist * speed)
        else:
            pref = (0.0, 0.0)
        agents.append(
            AgentState(
                id=vid,
                position=(x, y),
                velocity=vel,
                # inflate the avoidance disc to absorb pursuit tracking error
                radius=cfg.vehicle.body_radius * cfg.rvo_radius_margin,
                pref_velocity=pref,
                max_speed=max_speed,
            )
        )
    if all_arrived:
        fleet.completed = True
        for vid in fleet.states:
            state = fleet.states[vid]
            if state is None:
                gx, gy = fleet.goals[vid]
                hold = TimedPath([Waypoint(gx, gy, now), Waypoint(gx, gy, now + 1.0)])
                state = FollowState(path=hold)
            fleet.states[vid] = FollowState(path=state.path, done=True)
        return
    goals = [fleet.goals[a.id] for a in agents]
    paths = velocities_to_timed_paths(
        agents, cfg.rvo_tau, cfg.rvo_dt, cfg.rvo_k_steps, goals=goals
    )
    for agent, path in zip(agents, paths):
        fleet.states[agent.id] = FollowState(path=_shift_path(path, now))
    fleet.prev_frame = frame
    fleet.next_replan = now + cfg.rvo_k_steps * cfg.rvo_dt


@dataclass
class ReplayReport:
    ticks_checked: int
    divergences: list[dict]

    @property
    def ok(self) -> bool:
        return not self.divergences


def replay(log: RunLog) -> ReplayReport:
    """Re-execute a log's config and compare poses and thrusts per tick."""
    if not log.complete:
        raise ValueError("cannot replay an incomplete log")
    if log.header.get("version") != __version__:
        raise ValueError(
            f"log version {log.header.get('version')} != runtime {__version__}"
        )
    cfg = ScenarioConfig.from_dict(log.header["config"])
    fresh = run_scenario(cfg)
    divergences = []
    for rec, ref in zip(fresh.ticks, log.ticks):
        for key in ("poses", "thrusts"):
            if json.dumps(rec[key]) != json.dumps(ref[key]):
                divergences.append({"tick": rec["tick"], "field": key})
                break
        if divergences:
            break
    if len(fresh.ticks) != len(log.ticks) and not divergences:
        divergences.append({"tick": min(len(fresh.ticks), len(log.ticks)), "field": "length"})
    return ReplayReport(ticks_checked=len(log.ticks), divergences=divergences)
