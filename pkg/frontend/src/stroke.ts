/** Hand-drawn stroke -> draw_path waypoints.
 *
 * Pointer samples arrive in workspace meters (already unprojected).  They
 * are clipped to the arena boundary, then downsampled so consecutive
 * waypoints are at least MIN_SPACING_M apart; the final sample is always
 * kept so the path ends where the stroke ended.  Fewer than 2 distinct
 * waypoints means no command.
 */

import type { Arena, Point } from "./types.js";

export const MIN_SPACING_M = 0.01;

export function clipToArena(p: Point, arena: Arena): Point {
  return {
    x: Math.min(Math.max(p.x, 0), arena.width),
    y: Math.min(Math.max(p.y, 0), arena.height),
  };
}

/** Returns the waypoint list for a draw_path command, or null if the
 * stroke is too short to form a path. */
export function processStroke(samples: Point[], arena: Arena): Point[] | null {
  const clipped = samples.map((p) => clipToArena(p, arena));
  const out: Point[] = [];
  for (const p of clipped) {
    const last = out[out.length - 1];
    if (last === undefined || Math.hypot(p.x - last.x, p.y - last.y) >= MIN_SPACING_M) {
      out.push(p);
    }
  }
  // keep the true stroke endpoint when that preserves the spacing rule;
  // otherwise the kept path already ends within one spacing of it
  const tail = clipped[clipped.length - 1];
  const last = out[out.length - 1];
  const prev = out[out.length - 2];
  if (
    tail !== undefined &&
    last !== undefined &&
    (tail.x !== last.x || tail.y !== last.y) &&
    prev !== undefined &&
    Math.hypot(tail.x - prev.x, tail.y - prev.y) >= MIN_SPACING_M
  ) {
    out[out.length - 1] = tail;
  }
  return out.length >= 2 ? out : null;
}
