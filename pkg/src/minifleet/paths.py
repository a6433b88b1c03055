"""Timed waypoint paths.

A TimedPath is the common currency between the planners and the path
follower: an ordered polyline whose vertices carry schedule timestamps.
Cumulative arclength per waypoint is cached so the follower can convert
between schedule time and distance along the path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

MIN_SEGMENT_LENGTH = 1e-9


@dataclass(frozen=True)
class Waypoint:
    x: float
    y: float
    t: float


@dataclass(frozen=True)
class TimedPath:
    """Polyline with strictly increasing timestamps (>= 2 waypoints).

    Consecutive duplicate points are rejected unless they are schedule
    holds (identical coordinates with advancing timestamps), which the
    planners emit for robots that stay put for a step.
    """

    waypoints: tuple[Waypoint, ...]
    arclengths: tuple[float, ...] = field(init=False)

    def __init__(self, waypoints) -> None:
        wps = tuple(waypoints)
        if len(wps) < 2:
            raise ValueError("a TimedPath needs at least 2 waypoints")
        cum = [0.0]
        for a, b in zip(wps, wps[1:]):
            if b.t <= a.t:
                raise ValueError("waypoint timestamps must be strictly increasing")
            seg = math.hypot(b.x - a.x, b.y - a.y)
            if seg < MIN_SEGMENT_LENGTH and b.t - a.t < MIN_SEGMENT_LENGTH:
                raise ValueError("consecutive duplicate waypoints")
            cum.append(cum[-1] + seg)
        object.__setattr__(self, "waypoints", wps)
        object.__setattr__(self, "arclengths", tuple(cum))

    @property
    def length(self) -> float:
        return self.arclengths[-1]

    @property
    def t_start(self) -> float:
        return self.waypoints[0].t

    @property
    def t_end(self) -> float:
        return self.waypoints[-1].t

    def scheduled_arclength(self, now: float) -> float:
        """Arclength a vehicle on schedule should have covered at `now`.

        Linear interpolation of cumulative arclength against timestamps,
        clamped to the path's time span.
        """
        wps = self.waypoints
        if now <= wps[0].t:
            return 0.0
        if now >= wps[-1].t:
            return self.length
        # linear scan: paths are short and the follower calls this per tick
        for i in range(len(wps) - 1):
            if now <= wps[i + 1].t:
                frac = (now - wps[i].t) / (wps[i + 1].t - wps[i].t)
                return self.arclengths[i] + frac * (self.arclengths[i + 1] - self.arclengths[i])
        return self.length

    def project_arclength(self, x: float, y: float, first: int, last: int) -> float:
        """Arclength of the closest point on segments [first, last] to (x, y)."""
        first = max(0, first)
        last = min(len(self.waypoints) - 2, last)
        best_d2 = math.inf
        best_s = 0.0
        for i in range(first, last + 1):
            a = self.waypoints[i]
            b = self.waypoints[i + 1]
            dx, dy = b.x - a.x, b.y - a.y
            seg2 = dx * dx + dy * dy
            if seg2 < MIN_SEGMENT_LENGTH**2:
                u = 0.0
            else:
                u = min(1.0, max(0.0, ((x - a.x) * dx + (y - a.y) * dy) / seg2))
            px, py = a.x + u * dx, a.y + u * dy
            d2 = (x - px) ** 2 + (y - py) ** 2
            if d2 < best_d2:
                best_d2 = d2
                best_s = self.arclengths[i] + u * math.sqrt(seg2)
        return best_s


def timestamp_polyline(points, nominal_speed: float, t0: float = 0.0) -> TimedPath:
    """Attach timestamps to a bare polyline assuming constant speed.

    Zero-length segments (repeated points from hand drawing) are dropped.
    """
    if nominal_speed <= 0.0:
        raise ValueError("nominal_speed must be positive")
    cleaned: list[tuple[float, float]] = []
    for x, y in points:
        if cleaned and math.hypot(x - cleaned[-1][0], y - cleaned[-1][1]) < MIN_SEGMENT_LENGTH:
            continue
        cleaned.append((x, y))
    if len(cleaned) < 2:
        raise ValueError("polyline needs at least 2 distinct points")
    wps = [Waypoint(cleaned[0][0], cleaned[0][1], t0)]
    for (ax, ay), (bx, by) in zip(cleaned, cleaned[1:]):
        dt = math.hypot(bx - ax, by - ay) / nominal_speed
        wps.append(Waypoint(bx, by, wps[-1].t + dt))
    return TimedPath(wps)


def load_polylines(path) -> list[list[tuple[float, float]]]:
    """Read hand-drawn polylines from an NDJSON file.

    Each line is a JSON array of {"x": meters, "y": meters} objects in the
    workspace frame.
    """
    polylines = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if not isinstance(record, list):
                raise ValueError(f"line {lineno}: expected a JSON array of points")
            polylines.append([(float(p["x"]), float(p["y"])) for p in record])
    return polylines
