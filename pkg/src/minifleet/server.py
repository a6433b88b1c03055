"""Live fleet service: the process the operator console attaches to.

One simulation loop owns a LiveSession; every network event (WebSocket
command, raw thrust bytes on the command port) is applied between ticks on
the same event loop, so the session itself needs no locking.  Telemetry is
the exact PoseFrame NDJSON, broadcast identically to raw TCP subscribers
and WebSocket clients; commands are ConsoleCommand JSON objects answered
with one ack object each.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .hexgrid import build_hex_grid
from .orchestrator import ScenarioConfig, _Fleet, _setup_scenario, _update_scenario
from .paths import TimedPath, Waypoint, timestamp_polyline
from .pursuit import FollowState, PursuitConfig, follow_step
from .vehicle import DEFAULT_PARAMS, Pose2D, VehicleParams, WheelThrust
from .wire import PoseFrame, PosePublisher, ThrustFrame, encode_pose_frame
from .world import SensorModel, World

COMMAND_KINDS = ("draw_path", "set_goal", "start_scenario", "stop")


def _ack(kind: str, ok: bool, **extra) -> dict:
    return {"kind": "ack", "cmd": kind, "ok": ok, **extra}


@dataclass
class LiveSession:
    """Tick-driven fleet state behind the serve command.

    Starts idle: vehicles parked on the arena midline, no paths.  Commands
    arm paths or swap in a full scenario; `tick` advances one control
    period and returns the telemetry line to broadcast.
    """

    vehicle_count: int = 6
    loop_hz: float = 30.0
    seed: int = 0
    arena: tuple[float, float] = (1.5, 0.9)
    vehicle: VehicleParams = DEFAULT_PARAMS
    pursuit: PursuitConfig = PursuitConfig()
    sensor: SensorModel = SensorModel()
    nominal_speed: float = 0.12
    publisher: PosePublisher = field(default_factory=PosePublisher)

    def __post_init__(self) -> None:
        if self.vehicle_count < 1:
            raise ValueError("vehicle_count must be >= 1")
        self.cfg: ScenarioConfig | None = None
        self.fleet: _Fleet | None = None
        self.manual: dict[int, ThrustFrame] = {}
        self.last_seen: dict[int, tuple[float, float, float]] = {}
        self.states: dict[int, FollowState | None] = {}
        self._spawn_idle()

    def _spawn_idle(self) -> None:
        self.world = World(arena=self.arena, rng_seed=self.seed)
        w, h = self.arena
        for i in range(self.vehicle_count):
            x = w * (i + 1) / (self.vehicle_count + 1)
            self.world.add_vehicle(i, Pose2D(x, h / 2.0, 0.0), self.vehicle)
            self.states[i] = None
        self.cfg = None
        self.fleet = None
        self.manual.clear()
        self.last_seen.clear()

    @property
    def now(self) -> float:
        return self.world.clock

    def handle_command(self, cmd: dict) -> dict:
        kind = cmd.get("kind")
        if kind not in COMMAND_KINDS:
            return _ack(str(kind), False, error=f"unknown command kind {kind!r}")
        try:
            if kind == "draw_path":
                return self._cmd_draw_path(cmd)
            if kind == "set_goal":
                return self._cmd_set_goal(cmd)
            if kind == "start_scenario":
                return self._cmd_start_scenario(cmd)
            return self._cmd_stop()
        except (ValueError, KeyError) as exc:
            message = exc.args[0] if exc.args else str(exc)
            return _ack(kind, False, error=str(message))

    def _check_vehicle(self, cmd: dict) -> int:
        vid = cmd.get("vehicle_id")
        if vid is None or int(vid) not in self.world.vehicles:
            raise KeyError("unknown id")
        return int(vid)

    def _check_points(self, cmd: dict, minimum: int) -> list[tuple[float, float]]:
        pts = [(float(p["x"]), float(p["y"])) for p in cmd.get("waypoints") or []]
        if len(pts) < minimum:
            raise ValueError(f"need at least {minimum} waypoints")
        w, h = self.arena
        for x, y in pts:
            if not (0.0 <= x <= w and 0.0 <= y <= h):
                raise ValueError(f"waypoint ({x}, {y}) outside arena")
        return pts

    def _cmd_draw_path(self, cmd: dict) -> dict:
        vid = self._check_vehicle(cmd)
        pts = self._check_points(cmd, minimum=2)
        path = timestamp_polyline(pts, self.nominal_speed, t0=self.now)
        self.states[vid] = FollowState(path=path)
        self.manual.pop(vid, None)
        return _ack("draw_path", True, vehicle_id=vid, t_end=path.t_end)

    def _cmd_set_goal(self, cmd: dict) -> dict:
        vid = self._check_vehicle(cmd)
        gx, gy = self._check_points(cmd, minimum=1)[-1]
        pose = self.world.vehicles[vid].pose
        if math.hypot(gx - pose.x, gy - pose.y) <= self.pursuit.goal_tolerance:
            self.states[vid] = None
            return _ack("set_goal", True, vehicle_id=vid, already_there=True)
        path = timestamp_polyline(
            [(pose.x, pose.y), (gx, gy)], self.nominal_speed, t0=self.now
        )
        self.states[vid] = FollowState(path=path)
        self.manual.pop(vid, None)
        return _ack("set_goal", True, vehicle_id=vid, t_end=path.t_end)

    def _cmd_start_scenario(self, cmd: dict) -> dict:
        name = cmd.get("scenario")
        params = dict(cmd.get("params") or {})
        cfg = ScenarioConfig(
            scenario=str(name),
            vehicle_count=int(params.pop("vehicle_count", self.vehicle_count)),
            loop_hz=self.loop_hz,
            seed=int(params.pop("seed", self.seed)),
            arena=self.arena,
            vehicle=self.vehicle,
            pursuit=self.pursuit,
            sensor=self.sensor,
            nominal_speed=self.nominal_speed,
            **params,
        )
        import random

        world = World(arena=self.arena, rng_seed=random.Random(cfg.seed).randrange(2**31))
        fleet = _Fleet(cfg)
        _setup_scenario(cfg, world, fleet, random.Random(cfg.seed + 1), dict(cfg.rate_scales))
        self.world = world
        self.cfg = cfg
        self.fleet = fleet
        self.states = fleet.states
        self.manual.clear()
        self.last_seen.clear()
        extra = {}
        if cfg.scenario == "minmax_hex":
            grid = build_hex_grid(cfg.arena, cfg.vehicle, cfg.clearance_factor)
            extra["grid"] = {
                "edge_length_e": grid.edge_length_e,
                "vertices": [[x, y] for x, y in grid.vertices],
                "edges": [list(n) for n in grid.edges],
            }
        return _ack("start_scenario", True, scenario=cfg.scenario,
                    vehicles=sorted(self.world.vehicles), **extra)

    def _cmd_stop(self) -> dict:
        for vid in self.states:
            self.states[vid] = None
        self.manual.clear()
        if self.fleet is not None:
            self.fleet.completed = True
        return _ack("stop", True)

    def apply_thrust(self, frame: ThrustFrame) -> None:
        """Raw command-port path: one decoded frame drives one vehicle."""
        if frame.vehicle_id in self.world.vehicles:
            self.manual[frame.vehicle_id] = frame
            self.states[frame.vehicle_id] = None

    def tick(self) -> bytes:
        """One control period: observe, steer, advance.  Returns the
        telemetry NDJSON line for this frame."""
        dt = 1.0 / self.loop_hz
        now = self.now
        frame = self.world.observe(self.sensor)
        self.publisher.publish(frame)
        line = encode_pose_frame(frame)
        for vid, x, y, th in frame.poses:
            self.last_seen[vid] = (x, y, th)
        if self.cfg is not None and self.fleet is not None and not self.fleet.completed:
            self.fleet.last_seen = self.last_seen
            _update_scenario(self.cfg, self.fleet, frame, now)
        commands: list[ThrustFrame] = []
        for vid in sorted(self.world.vehicles):
            if vid in self.manual:
                commands.append(self.manual[vid])
                continue
            state = self.states.get(vid)
            if state is None or state.done or vid not in self.last_seen:
                commands.append(ThrustFrame(vid, 0, 0))
                continue
            x, y, th = self.last_seen[vid]
            thrust, new_state = follow_step(
                state, Pose2D(x, y, th), now, self.pursuit, self.vehicle
            )
            self.states[vid] = new_state
            commands.append(
                ThrustFrame(vid, round(thrust.u_left * 100), round(thrust.u_right * 100))
            )
        self.world.tick(commands, dt)
        return line


def create_app(session: LiveSession):
    """FastAPI app exposing the WebSocket bridge at /ws.

    Text frames out: telemetry NDJSON lines (verbatim) plus one-off ack
    objects; text frames in: ConsoleCommand JSON.
    """
    import asyncio

    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    app = FastAPI()
    app.state.session = session
    app.state.ws_clients = set()

    def broadcast(line: bytes) -> None:
        text = line.decode("utf-8").rstrip("\n")
        for queue in list(app.state.ws_clients):
            if queue.full():
                try:  # drop the oldest frame for a slow client
                    queue.get_nowait()
                except asyncio.QueueEmpty:
                    pass
            queue.put_nowait(text)

    app.state.broadcast = broadcast

    async def ws_endpoint(ws) -> None:
        await ws.accept()
        queue: asyncio.Queue = asyncio.Queue(maxsize=64)
        app.state.ws_clients.add(queue)

        async def pump() -> None:
            while True:
                await ws.send_text(await queue.get())

        sender = asyncio.create_task(pump())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    cmd = json.loads(raw)
                except json.JSONDecodeError as exc:
                    ack = _ack("?", False, error=f"bad JSON: {exc}")
                else:
                    ack = session.handle_command(cmd)
                await ws.send_text(json.dumps(ack, separators=(",", ":")))
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            app.state.ws_clients.discard(queue)

    # the module uses postponed annotations and fastapi is imported lazily,
    # so the WebSocket annotation must be attached as a real class before
    # route registration or it would be parsed as a query parameter
    ws_endpoint.__annotations__["ws"] = WebSocket
    app.websocket("/ws")(ws_endpoint)

    return app


def serve(
    telemetry_port: int = 5590,
    command_port: int = 5591,
    ws_port: int = 8080,
    vehicle_count: int = 6,
    loop_hz: float = 30.0,
    seed: int = 0,
) -> None:
    """Run the live service until interrupted (blocking)."""
    import asyncio

    import uvicorn
    from .wire import decode_thrust_frame, NeedMoreData, WireError

    session = LiveSession(vehicle_count=vehicle_count, loop_hz=loop_hz, seed=seed)
    app = create_app(session)
    tcp_writers: set = set()

    async def telemetry_conn(reader, writer) -> None:
        tcp_writers.add(writer)
        try:
            await reader.read()  # subscribers never send; wait for close
        finally:
            tcp_writers.discard(writer)
            writer.close()

    async def command_conn(reader, writer) -> None:
        buffer = b""
        while True:
            chunk = await reader.read(256)
            if not chunk:
                break
            buffer += chunk
            while True:
                try:
                    frame, consumed = decode_thrust_frame(buffer)
                except NeedMoreData:
                    break
                except WireError as exc:
                    buffer = buffer[getattr(exc, "consumed", 1):]
                    continue
                buffer = buffer[consumed:]
                session.apply_thrust(frame)
        writer.close()

    async def loop() -> None:
        dt = 1.0 / loop_hz
        while True:
            line = session.tick()
            app.state.broadcast(line)
            for writer in list(tcp_writers):
                writer.write(line)
            await asyncio.sleep(dt)

    async def main() -> None:
        await asyncio.start_server(telemetry_conn, host="0.0.0.0", port=telemetry_port)
        await asyncio.start_server(command_conn, host="0.0.0.0", port=command_port)
        asyncio.get_running_loop().create_task(loop())
        config = uvicorn.Config(app, host="0.0.0.0", port=ws_port, log_level="warning")
        await uvicorn.Server(config).serve()

    asyncio.run(main())
