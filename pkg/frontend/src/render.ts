/** Canvas drawing.  All geometry flows through the Viewport so meters are
 * uniform and y-up regardless of canvas size. */

import type { FleetView } from "./fleet.js";
import { worldToScreen, type Viewport } from "./transform.js";
import type { Arena, Point } from "./types.js";

const GLYPH_RADIUS_M = 0.047; // drawn at the vehicle's physical footprint

export interface RenderOptions {
  stale: boolean;
  strokePreview: Point[] | null;
}

export function renderFrame(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  arena: Arena,
  fleet: FleetView,
  opts: RenderOptions,
): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);

  const origin = worldToScreen(vp, { x: 0, y: arena.height });
  ctx.strokeStyle = "#444";
  ctx.lineWidth = 2;
  ctx.strokeRect(origin.x, origin.y, arena.width * vp.scale, arena.height * vp.scale);

  for (const [id, trail] of fleet.trails) {
    if (trail.length < 2) continue;
    ctx.strokeStyle = opts.stale ? "#bbb" : trailColor(id);
    ctx.lineWidth = 1;
    ctx.beginPath();
    trail.forEach((p, i) => {
      const s = worldToScreen(vp, p);
      if (i === 0) ctx.moveTo(s.x, s.y);
      else ctx.lineTo(s.x, s.y);
    });
    ctx.stroke();
  }

  for (const pose of fleet.latest.values()) {
    const c = worldToScreen(vp, pose);
    const r = GLYPH_RADIUS_M * vp.scale;
    const selected = fleet.selected === pose.id;
    ctx.save();
    ctx.translate(c.x, c.y);
    // canvas y points down, so a counterclockwise workspace heading is a
    // negative canvas rotation
    ctx.rotate(-pose.theta);
    ctx.fillStyle = opts.stale ? "#bbb" : trailColor(pose.id);
    ctx.strokeStyle = selected ? "#000" : "transparent";
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.moveTo(r, 0); // nose points along +x at theta = 0
    ctx.lineTo(-0.6 * r, 0.7 * r);
    ctx.lineTo(-0.6 * r, -0.7 * r);
    ctx.closePath();
    ctx.fill();
    if (selected) ctx.stroke();
    ctx.restore();
    ctx.fillStyle = opts.stale ? "#999" : "#111";
    ctx.font = "12px sans-serif";
    ctx.fillText(String(pose.id), c.x + r + 3, c.y - r - 3);
  }

  if (opts.strokePreview !== null && opts.strokePreview.length >= 2) {
    ctx.strokeStyle = "#d33";
    ctx.lineWidth = 2;
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    opts.strokePreview.forEach((p, i) => {
      const s = worldToScreen(vp, p);
      if (i === 0) ctx.moveTo(s.x, s.y);
      else ctx.lineTo(s.x, s.y);
    });
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

function trailColor(id: number): string {
  const hues = [210, 30, 120, 280, 0, 170, 60, 330];
  return `hsl(${hues[id % hues.length]}, 70%, 45%)`;
}
