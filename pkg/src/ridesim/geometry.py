"""2D polyline helpers: arc length, interpolation, nearest-point projection."""

from __future__ import annotations

import math
from bisect import bisect_right

Point = tuple[float, float]


class Polyline:
    """Piecewise-linear path with cumulative arc-length indexing."""

    def __init__(self, points: list[Point]):
        if len(points) < 2:
            raise ValueError("polyline needs at least 2 points")
        cum = [0.0]
        for (x0, y0), (x1, y1) in zip(points, points[1:]):
            seg = math.hypot(x1 - x0, y1 - y0)
            if seg == 0.0:
                raise ValueError("consecutive polyline points must be distinct")
            cum.append(cum[-1] + seg)
        self.points = [(float(x), float(y)) for x, y in points]
        self.cum = cum

    @property
    def length(self) -> float:
        return self.cum[-1]

    def _segment_index(self, s: float) -> int:
        # segment i spans arc [cum[i], cum[i+1]]
        i = bisect_right(self.cum, s) - 1
        return min(max(i, 0), len(self.points) - 2)

    def point_at(self, s: float) -> Point:
        """Point at arc position s, clamped to [0, length]."""
        if s <= 0.0:
            return self.points[0]
        if s >= self.length:
            return self.points[-1]
        i = self._segment_index(s)
        (x0, y0), (x1, y1) = self.points[i], self.points[i + 1]
        seg = self.cum[i + 1] - self.cum[i]
        t = (s - self.cum[i]) / seg
        return (x0 + t * (x1 - x0), y0 + t * (y1 - y0))

    def tangent_at(self, s: float) -> float:
        """Heading (radians) of the segment containing arc position s."""
        s = min(max(s, 0.0), self.length)
        i = self._segment_index(s) if s < self.length else len(self.points) - 2
        (x0, y0), (x1, y1) = self.points[i], self.points[i + 1]
        return math.atan2(y1 - y0, x1 - x0)

    def nearest(self, p: Point, s_min: float = 0.0,
                s_max: float | None = None) -> tuple[float, float]:
        """Closest point on the path to p, optionally restricted to an arc window.

        Returns (arc position, distance). Scans every candidate segment; ties
        resolve to the smallest arc position.
        """
        if s_max is None:
            s_max = self.length
        s_min = max(0.0, s_min)
        s_max = min(self.length, s_max)
        px, py = p
        best_s = s_min
        best_d2 = math.inf
        lo = self._segment_index(s_min)
        hi = self._segment_index(s_max)
        for i in range(lo, hi + 1):
            (x0, y0), (x1, y1) = self.points[i], self.points[i + 1]
            dx, dy = x1 - x0, y1 - y0
            seg2 = dx * dx + dy * dy
            t = ((px - x0) * dx + (py - y0) * dy) / seg2
            seg_len = self.cum[i + 1] - self.cum[i]
            # clamp the parameter so the arc position stays inside the window
            t_lo = (s_min - self.cum[i]) / seg_len if self.cum[i] < s_min else 0.0
            t_hi = (s_max - self.cum[i]) / seg_len if self.cum[i + 1] > s_max else 1.0
            t = min(max(t, t_lo), t_hi)
            cx, cy = x0 + t * dx, y0 + t * dy
            d2 = (px - cx) ** 2 + (py - cy) ** 2
            if d2 < best_d2:
                best_d2 = d2
                best_s = self.cum[i] + t * seg_len
        return best_s, math.sqrt(best_d2)

    def distance_to(self, p: Point) -> float:
        return self.nearest(p)[1]
