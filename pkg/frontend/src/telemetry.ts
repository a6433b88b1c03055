/** Parsing of incoming WebSocket text frames.
 *
 * The socket interleaves two shapes: telemetry lines (the pose-frame NDJSON
 * format, verbatim) and ack objects for commands.  Anything else is
 * reported as malformed rather than silently dropped.
 */

import type { Ack, PoseFrame, VehiclePose } from "./types.js";

export type Incoming =
  | { type: "frame"; frame: PoseFrame }
  | { type: "ack"; ack: Ack }
  | { type: "malformed"; reason: string };

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

/** Parse one pose tuple `[id, x, y, theta]`. */
function parsePose(entry: unknown): VehiclePose | null {
  if (!Array.isArray(entry) || entry.length !== 4) return null;
  const [id, x, y, theta] = entry;
  if (!isFiniteNumber(id) || !Number.isInteger(id) || id < 0) return null;
  if (!isFiniteNumber(x) || !isFiniteNumber(y) || !isFiniteNumber(theta)) return null;
  return { id, x, y, theta };
}

export function parseMessage(text: string): Incoming {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (err) {
    return { type: "malformed", reason: `not JSON: ${String(err)}` };
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    return { type: "malformed", reason: "not a JSON object" };
  }
  const obj = data as Record<string, unknown>;
  if (obj.kind === "ack") {
    if (typeof obj.cmd !== "string" || typeof obj.ok !== "boolean") {
      return { type: "malformed", reason: "ack missing cmd/ok" };
    }
    return { type: "ack", ack: obj as unknown as Ack };
  }
  if (isFiniteNumber(obj.t) && Array.isArray(obj.poses)) {
    const poses: VehiclePose[] = [];
    for (const entry of obj.poses) {
      const pose = parsePose(entry);
      if (pose === null) {
        return { type: "malformed", reason: `bad pose entry ${JSON.stringify(entry)}` };
      }
      poses.push(pose);
    }
    return { type: "frame", frame: { t: obj.t, poses } };
  }
  return { type: "malformed", reason: "neither telemetry frame nor ack" };
}
