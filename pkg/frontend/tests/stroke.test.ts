import { describe, expect, it } from "vitest";

import { MIN_SPACING_M, clipToArena, processStroke } from "../src/stroke.js";

const ARENA = { width: 1.5, height: 0.9 };

function spacing(points: { x: number; y: number }[]): number[] {
  const out: number[] = [];
  for (let i = 1; i < points.length; i++) {
    const a = points[i - 1]!;
    const b = points[i]!;
    out.push(Math.hypot(b.x - a.x, b.y - a.y));
  }
  return out;
}

describe("clipToArena", () => {
  it("leaves interior points alone", () => {
    expect(clipToArena({ x: 0.3, y: 0.3 }, ARENA)).toEqual({ x: 0.3, y: 0.3 });
  });

  it("clamps each axis to the boundary", () => {
    expect(clipToArena({ x: -0.2, y: 1.4 }, ARENA)).toEqual({ x: 0, y: 0.9 });
    expect(clipToArena({ x: 2.0, y: -1 }, ARENA)).toEqual({ x: 1.5, y: 0 });
  });
});

describe("processStroke", () => {
  it("downsamples a dense 0.5 m straight stroke to >= 1 cm spacing", () => {
    // pointer samples every millimeter
    const samples = Array.from({ length: 501 }, (_, i) => ({
      x: 0.2 + i * 0.001,
      y: 0.45,
    }));
    const out = processStroke(samples, ARENA);
    expect(out).not.toBeNull();
    for (const d of spacing(out!)) expect(d).toBeGreaterThanOrEqual(MIN_SPACING_M);
    // spans the full half meter and ends at the stroke endpoint
    expect(out![0]).toEqual({ x: 0.2, y: 0.45 });
    expect(out![out!.length - 1]!.x).toBeCloseTo(0.7, 10);
  });

  it("keeps the true endpoint when the last sample falls inside the final gap", () => {
    const samples = [
      { x: 0.2, y: 0.45 },
      { x: 0.215, y: 0.45 },
      { x: 0.223, y: 0.45 }, // only 8 mm past the last kept point
    ];
    const out = processStroke(samples, ARENA)!;
    expect(out[out.length - 1]!.x).toBeCloseTo(0.223, 10);
    for (const d of spacing(out)) expect(d).toBeGreaterThanOrEqual(MIN_SPACING_M);
  });

  it("ignores a single click", () => {
    expect(processStroke([{ x: 0.3, y: 0.3 }], ARENA)).toBeNull();
  });

  it("ignores an empty stroke", () => {
    expect(processStroke([], ARENA)).toBeNull();
  });

  it("ignores a jitter stroke shorter than one spacing", () => {
    const samples = [
      { x: 0.3, y: 0.3 },
      { x: 0.302, y: 0.3 },
      { x: 0.301, y: 0.301 },
    ];
    expect(processStroke(samples, ARENA)).toBeNull();
  });

  it("clips a wall-crossing stroke so every waypoint is inside", () => {
    const samples = Array.from({ length: 200 }, (_, i) => ({
      x: 1.3 + i * 0.002, // runs 0.4 m past the right wall
      y: 0.45,
    }));
    const out = processStroke(samples, ARENA)!;
    for (const p of out) {
      expect(p.x).toBeGreaterThanOrEqual(0);
      expect(p.x).toBeLessThanOrEqual(ARENA.width);
      expect(p.y).toBeGreaterThanOrEqual(0);
      expect(p.y).toBeLessThanOrEqual(ARENA.height);
    }
    expect(out[out.length - 1]).toEqual({ x: 1.5, y: 0.45 });
  });

  it("a stroke entirely outside collapses to the boundary and is ignored", () => {
    const samples = [
      { x: 2.0, y: 1.5 },
      { x: 2.1, y: 1.6 },
      { x: 2.2, y: 1.7 },
    ];
    expect(processStroke(samples, ARENA)).toBeNull();
  });
});
