import { describe, expect, it } from "vitest";

import { arcLengths, parseCourse, pointAt } from "../src/course.js";
import { arrowFor, fitViewport, worldToCanvas } from "../src/renderer.js";

const SQUARE: [number, number][] = [[0, 0], [10, 0], [10, 10], [0, 10], [0, 0]];

describe("arc math", () => {
  it("cumulative lengths match a hand computation", () => {
    expect(arcLengths(SQUARE)).toEqual([0, 10, 20, 30, 40]);
  });

  it("pointAt interpolates and clamps", () => {
    const cum = arcLengths(SQUARE);
    expect(pointAt(SQUARE, cum, 5)).toEqual([5, 0]);
    expect(pointAt(SQUARE, cum, 15)).toEqual([10, 5]);
    expect(pointAt(SQUARE, cum, -1)).toEqual([0, 0]);
    expect(pointAt(SQUARE, cum, 99)).toEqual([0, 0]);
  });
});

describe("parseCourse", () => {
  it("derives coin positions from spacing when the file has none", () => {
    const course = parseCourse({ points: SQUARE, spacing: 10, half_width: 2 });
    expect(course.length).toBe(40);
    expect(course.coins).toHaveLength(4);
    expect(course.coins[0]).toEqual({ x: 10, y: 0 });
    expect(course.coins[3]).toEqual({ x: 0, y: 0 });
  });

  it("prefers explicit coin entries from the engine export", () => {
    const course = parseCourse({
      points: SQUARE, spacing: 10,
      coins: [[10, 10, 0], [20, 10, 10]],
    });
    expect(course.coins).toEqual([{ x: 10, y: 0 }, { x: 10, y: 10 }]);
  });

  it("rejects malformed files", () => {
    expect(() => parseCourse({ points: [[0, 0]], spacing: 10 })).toThrow();
    expect(() => parseCourse({ points: SQUARE, spacing: 0 })).toThrow();
    expect(() => parseCourse("not json")).toThrow();
    expect(() => parseCourse(42)).toThrow();
  });
});

describe("view helpers", () => {
  it("fitViewport maps the course inside the canvas", () => {
    const course = parseCourse({ points: SQUARE, spacing: 10, half_width: 2 });
    const vp = fitViewport(course, 800, 600, 30);
    for (const [x, y] of SQUARE) {
      const [cx, cy] = worldToCanvas(vp, x, y);
      expect(cx).toBeGreaterThanOrEqual(0);
      expect(cx).toBeLessThanOrEqual(800);
      expect(cy).toBeGreaterThanOrEqual(0);
      expect(cy).toBeLessThanOrEqual(600);
    }
    // y axis is flipped: larger world y is higher on screen (smaller cy)
    expect(worldToCanvas(vp, 0, 10)[1]).toBeLessThan(worldToCanvas(vp, 0, 0)[1]);
  });

  it("turn arrow follows the steering sign with a neutral band", () => {
    expect(arrowFor(0.5)).toBe("left");
    expect(arrowFor(-0.5)).toBe("right");
    expect(arrowFor(0.05)).toBeNull();
  });
});
