/** Shared wire/domain types for the operator console.
 *
 * Telemetry is the server's pose-frame NDJSON, carried verbatim as
 * WebSocket text frames; commands are JSON objects answered with one ack
 * object each.  Nothing here is console state: the console is stateless
 * with respect to truth and redraws purely from received frames.
 */

export interface VehiclePose {
  id: number;
  x: number; // meters, workspace frame
  y: number; // meters, workspace frame
  theta: number; // radians, counterclockwise, 0 = +x
}

export interface PoseFrame {
  t: number; // seconds of simulation clock
  poses: VehiclePose[];
}

export type CommandKind = "draw_path" | "set_goal" | "start_scenario" | "stop";

export interface ConsoleCommand {
  kind: CommandKind;
  vehicle_id?: number;
  waypoints?: { x: number; y: number }[];
  scenario?: string;
  params?: Record<string, unknown>;
}

export interface Ack {
  kind: "ack";
  cmd: string;
  ok: boolean;
  error?: string;
  [extra: string]: unknown;
}

export interface Point {
  x: number;
  y: number;
}

export interface Arena {
  width: number; // meters
  height: number; // meters
}

/** Arena of the live service; the server owns the real value, this is the
 * default it serves with. */
export const DEFAULT_ARENA: Arena = { width: 1.5, height: 0.9 };
