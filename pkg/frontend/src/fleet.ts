/** Client-side fleet view state.
 *
 * Purely derived from received telemetry: the latest pose per vehicle, a
 * bounded trail of recent poses, the wall-clock arrival time of the last
 * frame (for staleness greying), and which vehicle the operator selected.
 */

import type { Point, PoseFrame, VehiclePose } from "./types.js";

export const STALE_AFTER_MS = 1000;
export const TRAIL_LENGTH = 90; // ~3 s at 30 fps
export const GLYPH_HIT_RADIUS_M = 0.05;

export class FleetView {
  latest = new Map<number, VehiclePose>();
  trails = new Map<number, Point[]>();
  lastFrameAtMs: number | null = null;
  lastFrameT: number | null = null;
  selected: number | null = null;

  ingest(frame: PoseFrame, nowMs: number): void {
    this.lastFrameAtMs = nowMs;
    this.lastFrameT = frame.t;
    for (const pose of frame.poses) {
      this.latest.set(pose.id, pose);
      let trail = this.trails.get(pose.id);
      if (trail === undefined) {
        trail = [];
        this.trails.set(pose.id, trail);
      }
      trail.push({ x: pose.x, y: pose.y });
      if (trail.length > TRAIL_LENGTH) trail.splice(0, trail.length - TRAIL_LENGTH);
    }
  }

  isStale(nowMs: number): boolean {
    return this.lastFrameAtMs === null || nowMs - this.lastFrameAtMs > STALE_AFTER_MS;
  }

  /** Nearest vehicle within the hit radius of a workspace point, or null. */
  hitTest(p: Point): number | null {
    let best: number | null = null;
    let bestDist = GLYPH_HIT_RADIUS_M;
    for (const pose of this.latest.values()) {
      const d = Math.hypot(pose.x - p.x, pose.y - p.y);
      if (d <= bestDist) {
        bestDist = d;
        best = pose.id;
      }
    }
    return best;
  }

  select(id: number | null): void {
    this.selected = id !== null && this.latest.has(id) ? id : null;
  }

  /** Reconnects drop nothing server-side; the view just starts fresh. */
  clear(): void {
    this.latest.clear();
    this.trails.clear();
    this.lastFrameAtMs = null;
    this.lastFrameT = null;
  }
}
