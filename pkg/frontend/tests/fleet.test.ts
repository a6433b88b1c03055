import { describe, expect, it } from "vitest";

import { FleetView, GLYPH_HIT_RADIUS_M, STALE_AFTER_MS, TRAIL_LENGTH } from "../src/fleet.js";
import type { PoseFrame } from "../src/types.js";

function frame(t: number, poses: [number, number, number, number][]): PoseFrame {
  return { t, poses: poses.map(([id, x, y, theta]) => ({ id, x, y, theta })) };
}

describe("FleetView.ingest", () => {
  it("tracks the latest pose per vehicle", () => {
    const fleet = new FleetView();
    fleet.ingest(frame(0, [[0, 0.1, 0.2, 0]]), 1000);
    fleet.ingest(frame(1 / 30, [[0, 0.15, 0.2, 0.1]]), 1033);
    expect(fleet.latest.get(0)).toEqual({ id: 0, x: 0.15, y: 0.2, theta: 0.1 });
    expect(fleet.lastFrameT).toBeCloseTo(1 / 30, 10);
  });

  it("a vehicle missing from one frame keeps its last pose", () => {
    const fleet = new FleetView();
    fleet.ingest(frame(0, [[0, 0.1, 0.2, 0], [1, 0.5, 0.5, 0]]), 0);
    fleet.ingest(frame(1 / 30, [[0, 0.11, 0.2, 0]]), 33);
    expect(fleet.latest.get(1)).toEqual({ id: 1, x: 0.5, y: 0.5, theta: 0 });
  });

  it("caps trails at the configured length", () => {
    const fleet = new FleetView();
    for (let i = 0; i < TRAIL_LENGTH + 40; i++) {
      fleet.ingest(frame(i / 30, [[0, i * 0.001, 0.2, 0]]), i * 33);
    }
    const trail = fleet.trails.get(0)!;
    expect(trail.length).toBe(TRAIL_LENGTH);
    // oldest entries dropped, newest kept
    expect(trail[trail.length - 1]!.x).toBeCloseTo((TRAIL_LENGTH + 39) * 0.001, 10);
  });
});

describe("staleness", () => {
  it("is stale before any frame", () => {
    expect(new FleetView().isStale(0)).toBe(true);
  });

  it("goes stale only after the threshold", () => {
    const fleet = new FleetView();
    fleet.ingest(frame(0, []), 5000);
    expect(fleet.isStale(5000 + STALE_AFTER_MS)).toBe(false);
    expect(fleet.isStale(5001 + STALE_AFTER_MS)).toBe(true);
  });
});

describe("hit testing and selection", () => {
  it("picks the nearest vehicle within the hit radius", () => {
    const fleet = new FleetView();
    fleet.ingest(frame(0, [[0, 0.3, 0.3, 0], [1, 0.36, 0.3, 0]]), 0);
    expect(fleet.hitTest({ x: 0.32, y: 0.3 })).toBe(0);
    expect(fleet.hitTest({ x: 0.345, y: 0.3 })).toBe(1);
  });

  it("misses beyond the radius", () => {
    const fleet = new FleetView();
    fleet.ingest(frame(0, [[0, 0.3, 0.3, 0]]), 0);
    expect(fleet.hitTest({ x: 0.3 + GLYPH_HIT_RADIUS_M + 0.001, y: 0.3 })).toBeNull();
  });

  it("select validates the id against known vehicles", () => {
    const fleet = new FleetView();
    fleet.ingest(frame(0, [[2, 0.3, 0.3, 0]]), 0);
    fleet.select(2);
    expect(fleet.selected).toBe(2);
    fleet.select(7);
    expect(fleet.selected).toBeNull();
  });

  it("clear resets derived state for a reconnect", () => {
    const fleet = new FleetView();
    fleet.ingest(frame(0, [[0, 0.3, 0.3, 0]]), 0);
    fleet.clear();
    expect(fleet.latest.size).toBe(0);
    expect(fleet.trails.size).toBe(0);
    expect(fleet.isStale(1)).toBe(true);
  });
});
