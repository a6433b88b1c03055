"""Fleet wire formats and link simulation.

Two message types cross the wire:

* PoseFrame, tracker -> controller: one NDJSON line per camera frame,
  `{"t":...,"poses":[{"id":..,"x":..,"y":..,"th":..},...]}` with poses
  sorted by id and numbers in shortest round-trip decimal form.
* ThrustFrame, controller -> vehicle: a 5-byte binary frame
  [0xA5, id, left, right, xor-checksum], left/right being signed percent
  octets.  The decoder scans for the 0xA5 header so a corrupted stream
  resynchronizes on the next frame boundary.

The command link is a directed star: vehicles only ever receive.  Link
unreliability is modeled by seeded independent frame drops plus a fixed
latency, and is compensated upstream by re-sending commands every tick.

Pose telemetry is distributed through a single-publisher latest-value
store; subscribers never block the publisher and never see a torn frame.
"""

from __future__ import annotations

import math
import random
import threading
from dataclasses import dataclass, field

from .vehicle import wrap_angle

HEADER = 0xA5
FRAME_SIZE = 5


class WireError(ValueError):
    pass


class ChecksumError(WireError):
    pass


class RangeError(WireError):
    pass


class NeedMoreData(WireError):
    pass


class NoDataYet(LookupError):
    pass


@dataclass(frozen=True)
class PoseFrame:
    """One tracker snapshot: frame timestamp plus per-vehicle SE(2) poses."""

    t: float
    poses: tuple[tuple[int, float, float, float], ...]  # (id, x, y, th)

    def __post_init__(self) -> None:
        ids = [p[0] for p in self.poses]
        if len(set(ids)) != len(ids):
            raise WireError("duplicate id in frame")

    def get(self, vehicle_id: int) -> tuple[float, float, float]:
        for vid, x, y, th in self.poses:
            if vid == vehicle_id:
                return (x, y, th)
        raise KeyError(vehicle_id)

    def ids(self) -> set[int]:
        return {p[0] for p in self.poses}


@dataclass(frozen=True)
class ThrustFrame:
    """Per-vehicle command: wheel thrusts as signed integer percent."""

    vehicle_id: int
    left_pct: int
    right_pct: int

    def __post_init__(self) -> None:
        if not 0 <= self.vehicle_id <= 255:
            raise RangeError("vehicle_id must fit in one octet")
        if not (-100 <= self.left_pct <= 100 and -100 <= self.right_pct <= 100):
            raise RangeError("thrust percent out of [-100, 100]")


@dataclass(frozen=True)
class LinkConfig:
    drop_probability: float = 0.0
    latency: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.drop_probability < 1.0:
            raise ValueError("drop_probability must be in [0, 1)")
        if self.latency < 0.0:
            raise ValueError("latency must be non-negative")


def _fmt_number(v: float) -> str:
    """Shortest round-trip decimal; integral values print without a fraction."""
    if isinstance(v, int):
        return str(v)
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        raise WireError("non-finite number in frame")
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def encode_pose_frame(frame: PoseFrame) -> bytes:
    parts = []
    for vid, x, y, th in sorted(frame.poses, key=lambda p: p[0]):
        parts.append(
            '{"id":%s,"x":%s,"y":%s,"th":%s}'
            % (vid, _fmt_number(x), _fmt_number(y), _fmt_number(th))
        )
    line = '{"t":%s,"poses":[%s]}\n' % (_fmt_number(frame.t), ",".join(parts))
    return line.encode("utf-8")


def decode_pose_frame(data: bytes | str) -> PoseFrame:
    import json

    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise WireError(f"malformed pose frame JSON: {exc}") from None
    if not isinstance(obj, dict) or "t" not in obj:
        raise WireError("missing field: t")
    if "poses" not in obj or not isinstance(obj["poses"], list):
        raise WireError("missing field: poses")
    poses = []
    seen: set[int] = set()
    for entry in obj["poses"]:
        for key in ("id", "x", "y", "th"):
            if key not in entry:
                raise WireError(f"missing field: {key}")
        vid = int(entry["id"])
        if vid in seen:
            raise WireError(f"duplicate id {vid}")
        seen.add(vid)
        poses.append(
            (vid, float(entry["x"]), float(entry["y"]), wrap_angle(float(entry["th"])))
        )
    return PoseFrame(t=float(obj["t"]), poses=tuple(poses))


def encode_thrust_frame(frame: ThrustFrame) -> bytes:
    payload = bytes(
        (HEADER, frame.vehicle_id, frame.left_pct & 0xFF, frame.right_pct & 0xFF)
    )
    checksum = 0
    for b in payload:
        checksum ^= b
    return payload + bytes((checksum,))


def _signed(octet: int) -> int:
    return octet - 256 if octet >= 128 else octet


def decode_thrust_frame(data: bytes) -> tuple[ThrustFrame, int]:
    """Decode one frame, scanning past garbage for the header.

    Returns (frame, bytes consumed including any skipped prefix).  Raises
    NeedMoreData if no complete frame is present, ChecksumError or
    RangeError for a frame that fails validation (consumed bytes can be
    recovered from the exception's `consumed` attribute).
    """
    start = data.find(bytes((HEADER,)))
    if start < 0:
        raise NeedMoreData(f"no header in {len(data)} bytes")
    if len(data) - start < FRAME_SIZE:
        raise NeedMoreData("incomplete frame after header")
    raw = data[start : start + FRAME_SIZE]
    checksum = 0
    for b in raw[:4]:
        checksum ^= b
    consumed = start + FRAME_SIZE
    if checksum != raw[4]:
        err = ChecksumError(f"checksum mismatch: {checksum:#04x} != {raw[4]:#04x}")
        err.consumed = consumed
        raise err
    left = _signed(raw[2])
    right = _signed(raw[3])
    if not (-100 <= left <= 100 and -100 <= right <= 100):
        err = RangeError(f"thrust percent out of range: ({left}, {right})")
        err.consumed = consumed
        raise err
    return ThrustFrame(vehicle_id=raw[1], left_pct=left, right_pct=right), consumed


class PosePublisher:
    """Single-writer latest-value store for pose telemetry.

    `latest` never blocks the publisher beyond a pointer swap under a lock;
    frames are immutable so subscribers can never observe a torn frame.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._frame: PoseFrame | None = None

    def publish(self, frame: PoseFrame) -> None:
        with self._lock:
            self._frame = frame

    def latest(self, subset: list[int] | None = None) -> PoseFrame:
        with self._lock:
            frame = self._frame
        if frame is None:
            raise NoDataYet("no pose frame published yet")
        if subset is None:
            return frame
        wanted = set(subset)
        return PoseFrame(t=frame.t, poses=tuple(p for p in frame.poses if p[0] in wanted))


def lossy_send(frames: list[ThrustFrame], cfg: LinkConfig, rng=None) -> list[ThrustFrame]:
    """Deliver frames over the unreliable star link.

    Each frame is independently dropped with cfg.drop_probability; the
    survivors keep their order.  Pass a random.Random to keep a persistent
    drop sequence across calls (the orchestrator does); otherwise one is
    seeded from cfg.seed per call.
    """
    if rng is None:
        rng = random.Random(cfg.seed)
    if cfg.drop_probability == 0.0:
        return list(frames)
    return [f for f in frames if rng.random() >= cfg.drop_probability]


@dataclass
class DelayLine:
    """Applies link latency: frames sent at t become available at t+latency."""

    latency: float
    _queue: list[tuple[float, ThrustFrame]] = field(default_factory=list)

    def push(self, t: float, frames: list[ThrustFrame]) -> None:
        for f in frames:
            self._queue.append((t + self.latency, f))

    def pop_due(self, now: float) -> list[ThrustFrame]:
        due = [f for t, f in self._queue if t <= now + 1e-12]
        self._queue = [(t, f) for t, f in self._queue if t > now + 1e-12]
        return due
