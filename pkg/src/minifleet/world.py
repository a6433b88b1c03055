"""Deterministic arena simulation: the stand-in for floor and camera.

The world advances vehicle poses under held thrust commands (a vehicle
keeps applying its last received command, as the real firmware does
between serial frames) and produces tracker observations through a
configurable sensor model: frames exist only at multiples of 1/fps, carry
seeded Gaussian pose noise, and may drop individual tags.

Identical seed, command sequence, and dt sequence give bit-identical
trajectories and frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .vehicle import Pose2D, VehicleParams, WheelThrust, integrate, wrap_angle
from .wire import PoseFrame, ThrustFrame


@dataclass
class VehicleSlot:
    pose: Pose2D
    params: VehicleParams
    thrust: WheelThrust = WheelThrust(0.0, 0.0)
    rate_scale: float = 1.0


@dataclass(frozen=True)
class SensorModel:
    sigma_xy: float = 0.002
    sigma_theta: float = 0.017
    fps: float = 30.0
    miss_probability: float = 0.005

    def __post_init__(self) -> None:
        if self.sigma_xy < 0.0 or self.sigma_theta < 0.0:
            raise ValueError("noise sigmas must be non-negative")
        if self.fps <= 0.0:
            raise ValueError("fps must be positive")
        if not 0.0 <= self.miss_probability < 1.0:
            raise ValueError("miss_probability must be in [0, 1)")


@dataclass
class World:
    arena: tuple[float, float]
    vehicles: dict[int, VehicleSlot] = field(default_factory=dict)
    clock: float = 0.0
    rng_seed: int = 0
    overlap_events: list[tuple[float, int, int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._rng = np.random.default_rng(self.rng_seed)
        self._frame_index: int | None = None
        self._frame: PoseFrame | None = None

    def add_vehicle(
        self, vehicle_id: int, pose: Pose2D, params: VehicleParams, rate_scale: float = 1.0
    ) -> None:
        if vehicle_id in self.vehicles:
            raise ValueError(f"duplicate vehicle id {vehicle_id}")
        self.vehicles[vehicle_id] = VehicleSlot(pose=pose, params=params, rate_scale=rate_scale)

    def tick(self, commands: list[ThrustFrame], dt: float) -> None:
        """Advance dt seconds: apply the latest command per vehicle, hold
        previous thrusts for the rest, clamp positions to the arena walls
        (no bounce), and record contact events without resolving them:
        disc overlaps as (t, a, b) and wall contacts as (t, vid, -1)."""
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        for cmd in commands:
            if cmd.vehicle_id not in self.vehicles:
                raise KeyError(f"unknown vehicle id {cmd.vehicle_id}")
        for cmd in commands:  # later frames for the same id win
            self.vehicles[cmd.vehicle_id].thrust = WheelThrust(
                cmd.left_pct / 100.0, cmd.right_pct / 100.0
            )
        width, height = self.arena
        # split long ticks so each RK4 step stays within the integrator's guard
        n_sub = max(1, math.ceil(dt / 0.1 - 1e-12))
        sub_dt = dt / n_sub
        clamped: list[int] = []
        for vid, slot in self.vehicles.items():
            thrust = WheelThrust(
                slot.thrust.u_left * slot.rate_scale, slot.thrust.u_right * slot.rate_scale
            )
            pose = slot.pose
            for _ in range(n_sub):
                pose = integrate(pose, thrust, slot.params, sub_dt)
            rb = slot.params.body_radius
            x = min(max(pose.x, rb), width - rb)
            y = min(max(pose.y, rb), height - rb)
            if x != pose.x or y != pose.y:
                clamped.append(vid)
            slot.pose = Pose2D(x, y, pose.theta)
        self.clock += dt
        for vid in sorted(clamped):  # wall contact: partner id -1 marks the wall
            self.overlap_events.append((self.clock, vid, -1))
        ids = sorted(self.vehicles)
        for i, a in enumerate(ids):
            pa = self.vehicles[a]
            for b in ids[i + 1 :]:
                pb = self.vehicles[b]
                if (
                    math.hypot(pa.pose.x - pb.pose.x, pa.pose.y - pb.pose.y)
                    < pa.params.body_radius + pb.params.body_radius
                ):
                    self.overlap_events.append((self.clock, a, b))

    def observe(self, sensor: SensorModel) -> PoseFrame:
        """Latest synthetic camera frame.

        Frames exist only at multiples of 1/fps; queries between frames
        return the cached most recent frame, so two observes inside the
        same frame interval are identical.  Noise and tag misses come from
        the world's seeded generator.
        """
        frame_index = math.floor(self.clock * sensor.fps + 1e-9)
        if self._frame is not None and frame_index == self._frame_index:
            return self._frame
        t = frame_index / sensor.fps
        poses = []
        for vid in sorted(self.vehicles):
            if sensor.miss_probability > 0.0 and self._rng.random() < sensor.miss_probability:
                continue
            pose = self.vehicles[vid].pose
            if sensor.sigma_xy > 0.0 or sensor.sigma_theta > 0.0:
                nx, ny, nth = (float(v) for v in self._rng.normal(0.0, 1.0, size=3))
                poses.append(
                    (
                        vid,
                        pose.x + sensor.sigma_xy * nx,
                        pose.y + sensor.sigma_xy * ny,
                        wrap_angle(pose.theta + sensor.sigma_theta * nth),
                    )
                )
            else:
                poses.append((vid, pose.x, pose.y, pose.theta))
        frame = PoseFrame(t=t, poses=tuple(poses))
        self._frame_index = frame_index
        self._frame = frame
        return frame

    def reset(self, placements: list[tuple[int, Pose2D]]) -> None:
        """Re-seat the fleet: set poses, zero the clock and all thrusts.

        Placements must be inside the arena and pairwise separated by more
        than two body radii.  The random seed is retained.
        """
        width, height = self.arena
        for vid, pose in placements:
            if vid not in self.vehicles:
                raise KeyError(f"unknown vehicle id {vid}")
            rb = self.vehicles[vid].params.body_radius
            if not (rb <= pose.x <= width - rb and rb <= pose.y <= height - rb):
                raise ValueError(f"placement of vehicle {vid} outside arena")
        for i, (ida, pa) in enumerate(placements):
            for idb, pb in placements[i + 1 :]:
                min_sep = (
                    self.vehicles[ida].params.body_radius
                    + self.vehicles[idb].params.body_radius
                )
                if math.hypot(pa.x - pb.x, pa.y - pb.y) <= min_sep:
                    raise ValueError(f"vehicles {ida} and {idb} placed overlapping")
        for vid, pose in placements:
            slot = self.vehicles[vid]
            slot.pose = pose
            slot.thrust = WheelThrust(0.0, 0.0)
        self.clock = 0.0
        self.overlap_events.clear()
        self._frame_index = None
        self._frame = None
