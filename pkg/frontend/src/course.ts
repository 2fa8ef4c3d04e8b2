/**
 * Course file loading (the engine's exported format) plus the little arc
 * interpolation needed to place coin markers when the file omits them.
 */

export type Point = [number, number];

export interface CourseData {
  points: Point[];
  spacing: number;
  halfWidth: number;
  pickupRadius: number;
  cum: number[];
  length: number;
  coins: { x: number; y: number }[];
}

export function arcLengths(points: Point[]): number[] {
  const cum = [0];
  for (let i = 1; i < points.length; i++) {
    const dx = points[i][0] - points[i - 1][0];
    const dy = points[i][1] - points[i - 1][1];
    cum.push(cum[i - 1] + Math.hypot(dx, dy));
  }
  return cum;
}

export function pointAt(points: Point[], cum: number[], s: number): Point {
  const total = cum[cum.length - 1];
  if (s <= 0) return points[0];
  if (s >= total) return points[points.length - 1];
  let lo = 0;
  let hi = cum.length - 1;
  while (hi - lo > 1) {
    const mid = (lo + hi) >> 1;
    if (cum[mid] <= s) lo = mid;
    else hi = mid;
  }
  const seg = cum[lo + 1] - cum[lo];
  const t = (s - cum[lo]) / seg;
  return [
    points[lo][0] + t * (points[lo + 1][0] - points[lo][0]),
    points[lo][1] + t * (points[lo + 1][1] - points[lo][1]),
  ];
}

export function parseCourse(raw: unknown): CourseData {
  const obj = typeof raw === "string" ? JSON.parse(raw) : raw;
  if (typeof obj !== "object" || obj === null) {
    throw new Error("course: not an object");
  }
  const rec = obj as Record<string, unknown>;
  const pts = rec["points"];
  if (!Array.isArray(pts) || pts.length < 2
      || !pts.every((p) => Array.isArray(p) && p.length === 2
                    && typeof p[0] === "number" && typeof p[1] === "number")) {
    throw new Error("course: points must be a list of [x, y]");
  }
  const spacing = rec["spacing"];
  if (typeof spacing !== "number" || spacing <= 0) {
    throw new Error("course: spacing must be a positive number");
  }
  const points = pts as Point[];
  const cum = arcLengths(points);
  const length = cum[cum.length - 1];

  let coins: { x: number; y: number }[];
  const fileCoins = rec["coins"];
  if (Array.isArray(fileCoins)) {
    coins = fileCoins.map((c) => ({ x: Number(c[1]), y: Number(c[2]) }));
  } else {
    coins = [];
    const eps = 1e-9;
    for (let k = 1; k * spacing <= length + eps; k++) {
      const [x, y] = pointAt(points, cum, k * spacing);
      coins.push({ x, y });
    }
  }
  return {
    points,
    spacing,
    halfWidth: typeof rec["half_width"] === "number" ? rec["half_width"] as number : 2.0,
    pickupRadius: typeof rec["pickup_radius"] === "number"
      ? rec["pickup_radius"] as number : 0.75,
    cum,
    length,
    coins,
  };
}
