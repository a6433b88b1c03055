/** Workspace-meters <-> canvas-pixels mapping.
 *
 * Uniform scale (meters are square on screen), y-up: workspace y grows
 * upward while canvas y grows downward, so the arena is flipped and
 * centered inside the canvas with a fixed pixel margin.
 */

import type { Arena, Point } from "./types.js";

export interface Viewport {
  scale: number; // pixels per meter
  offsetX: number; // canvas x of workspace x=0
  offsetY: number; // canvas y of workspace y=0 (bottom edge of arena)
}

export function makeViewport(
  arena: Arena,
  canvasWidth: number,
  canvasHeight: number,
  margin = 20,
): Viewport {
  const usableW = Math.max(1, canvasWidth - 2 * margin);
  const usableH = Math.max(1, canvasHeight - 2 * margin);
  const scale = Math.min(usableW / arena.width, usableH / arena.height);
  const offsetX = (canvasWidth - arena.width * scale) / 2;
  const offsetY = (canvasHeight + arena.height * scale) / 2;
  return { scale, offsetX, offsetY };
}

export function worldToScreen(vp: Viewport, p: Point): Point {
  return { x: vp.offsetX + p.x * vp.scale, y: vp.offsetY - p.y * vp.scale };
}

export function screenToWorld(vp: Viewport, p: Point): Point {
  return { x: (p.x - vp.offsetX) / vp.scale, y: (vp.offsetY - p.y) / vp.scale };
}
