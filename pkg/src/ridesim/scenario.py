"""Route geometry, coin placement, pickup detection, and trial lifecycle.

Four built-in routes of equal total length: a ring, a serpentine, a city-block
circuit with rounded corners, and a pinched double-lobe course (a figure-eight
opened at the waist so the corridor never self-intersects). Coins sit on the
centerline at equal arc spacing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, UnknownRoute
from .geometry import Point, Polyline

DEFAULT_LENGTH = 200.0       # m
DEFAULT_SPACING = 10.0       # m between coins
DEFAULT_HALF_WIDTH = 2.0     # m corridor half-width
DEFAULT_PICKUP_RADIUS = 0.75  # m

ROUTE_IDS = (1, 2, 3, 4)
ROUTE_NAMES = {1: "ring", 2: "serpentine", 3: "blocks", 4: "double_lobe"}

_COIN_EPS = 1e-9  # absorbs rescaling rounding when counting coins


@dataclass
class CourseGeometry:
    centerline: Polyline
    corridor_half_width: float

    @property
    def total_length(self) -> float:
        return self.centerline.length


@dataclass
class Coin:
    arc_pos: float
    x: float
    y: float
    collected: bool = False


@dataclass
class CoinSet:
    coins: list[Coin]
    spacing: float
    pickup_radius: float

    @property
    def total(self) -> int:
        return len(self.coins)

    @property
    def collected(self) -> int:
        return sum(1 for c in self.coins if c.collected)

    def reset(self) -> None:
        for c in self.coins:
            c.collected = False


@dataclass
class TrialStatus:
    phase: str = "training"  # training | running | complete | aborted
    coins_collected: int = 0
    start_tick: int = 0
    end_tick: int | None = None


# --- route construction ---

def _arc(cx: float, cy: float, r: float, deg0: float, deg1: float,
         step_deg: float = 3.0) -> list[Point]:
    """CCW circular arc sampled every step_deg, endpoints included."""
    n = max(2, int(round(abs(deg1 - deg0) / step_deg)))
    return [(cx + r * math.cos(math.radians(deg0 + (deg1 - deg0) * k / n)),
             cy + r * math.sin(math.radians(deg0 + (deg1 - deg0) * k / n)))
            for k in range(n + 1)]


def _bezier(p0: Point, p1: Point, p2: Point, p3: Point, n: int = 40) -> list[Point]:
    pts = []
    for k in range(n + 1):
        t = k / n
        u = 1.0 - t
        pts.append((
            u**3 * p0[0] + 3 * u**2 * t * p1[0] + 3 * u * t**2 * p2[0] + t**3 * p3[0],
            u**3 * p0[1] + 3 * u**2 * t * p1[1] + 3 * u * t**2 * p2[1] + t**3 * p3[1],
        ))
    return pts


def _dedup(pts: list[Point]) -> list[Point]:
    out = [pts[0]]
    for p in pts[1:]:
        if math.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) > 1e-9:
            out.append(p)
    return out


def _rounded_polygon(vertices: list[Point], radius: float,
                     step_deg: float = 5.0) -> list[Point]:
    """Closed circuit through the polygon edges with arc-rounded corners."""
    n = len(vertices)
    pts: list[Point] = []
    for i in range(n):
        prev = vertices[(i - 1) % n]
        cur = vertices[i]
        nxt = vertices[(i + 1) % n]
        vin = (cur[0] - prev[0], cur[1] - prev[1])
        vout = (nxt[0] - cur[0], nxt[1] - cur[1])
        lin = math.hypot(*vin)
        lout = math.hypot(*vout)
        uin = (vin[0] / lin, vin[1] / lin)
        uout = (vout[0] / lout, vout[1] / lout)
        # interior turn angle and tangent-point offset
        cross = uin[0] * uout[1] - uin[1] * uout[0]
        dot = uin[0] * uout[0] + uin[1] * uout[1]
        turn = math.atan2(cross, dot)
        d = radius * math.tan(abs(turn) / 2.0)
        t_in = (cur[0] - d * uin[0], cur[1] - d * uin[1])
        # arc center sits perpendicular to the incoming edge
        side = 1.0 if cross > 0 else -1.0
        center = (t_in[0] - side * radius * uin[1], t_in[1] + side * radius * uin[0])
        a0 = math.atan2(t_in[1] - center[1], t_in[0] - center[0])
        steps = max(2, int(abs(math.degrees(turn)) / step_deg))
        for k in range(steps + 1):
            a = a0 + side * abs(turn) * k / steps
            pts.append((center[0] + radius * math.cos(a),
                        center[1] + radius * math.sin(a)))
    return _close(_dedup(pts))


def _close(pts: list[Point]) -> list[Point]:
    if math.hypot(pts[0][0] - pts[-1][0], pts[0][1] - pts[-1][1]) > 1e-9:
        pts.append(pts[0])
    return pts


def _route_ring() -> list[Point]:
    return _close(_dedup(_arc(0.0, 31.0, 31.0, -90.0, 270.0, step_deg=2.8125)))


def _route_serpentine() -> list[Point]:
    pts = []
    n = 256
    for k in range(n + 1):
        x = 180.0 * k / n
        pts.append((x, 14.0 * math.sin(2.0 * math.pi * x / 90.0)))
    return _dedup(pts)


def _route_blocks() -> list[Point]:
    scale = 20.0
    vertices = [(0.0, 0.0), (3.0, 0.0), (3.0, 1.0), (2.0, 1.0), (2.0, 2.0), (0.0, 2.0)]
    return _rounded_polygon([(x * scale, y * scale) for x, y in vertices], radius=6.0)


def _route_double_lobe() -> list[Point]:
    r, cx = 15.0, 25.0
    left = _arc(-cx, 0.0, r, 50.0, 310.0)
    right = _arc(cx, 0.0, r, 230.0, 130.0 + 360.0)
    # tangent-continuous connectors bowing toward the waist
    d = 8.0
    t310 = (-math.sin(math.radians(310.0)), math.cos(math.radians(310.0)))
    t230 = (-math.sin(math.radians(230.0)), math.cos(math.radians(230.0)))
    t130 = (-math.sin(math.radians(130.0)), math.cos(math.radians(130.0)))
    t50 = (-math.sin(math.radians(50.0)), math.cos(math.radians(50.0)))
    bottom = _bezier(
        left[-1],
        (left[-1][0] + d * t310[0], left[-1][1] + d * t310[1]),
        (right[0][0] - d * t230[0], right[0][1] - d * t230[1]),
        right[0],
    )
    top = _bezier(
        right[-1],
        (right[-1][0] + d * t130[0], right[-1][1] + d * t130[1]),
        (left[0][0] - d * t50[0], left[0][1] - d * t50[1]),
        left[0],
    )
    return _close(_dedup(left + bottom[1:] + right[1:] + top[1:]))


_ROUTE_BUILDERS = {
    1: _route_ring,
    2: _route_serpentine,
    3: _route_blocks,
    4: _route_double_lobe,
}


def route_points(route: int, length: float = DEFAULT_LENGTH) -> list[Point]:
    """Built-in route polyline, rescaled so its arc length equals ``length``."""
    if route not in _ROUTE_BUILDERS:
        raise UnknownRoute(f"route must be one of {ROUTE_IDS}, got {route!r}")
    pts = _ROUTE_BUILDERS[route]()
    raw_len = Polyline(pts).length
    k = length / raw_len
    return [(x * k, y * k) for x, y in pts]


def place_coins(line: Polyline, spacing: float, pickup_radius: float) -> CoinSet:
    if spacing <= 0:
        raise ConfigError(f"coin spacing must be positive, got {spacing}")
    n = int((line.length + _COIN_EPS) / spacing)
    coins = []
    for k in range(1, n + 1):
        s = k * spacing
        x, y = line.point_at(s)
        coins.append(Coin(arc_pos=s, x=x, y=y))
    return CoinSet(coins=coins, spacing=spacing, pickup_radius=pickup_radius)


def generate_course(route: int, spacing: float = DEFAULT_SPACING,
                    half_width: float = DEFAULT_HALF_WIDTH,
                    length: float = DEFAULT_LENGTH,
                    pickup_radius: float = DEFAULT_PICKUP_RADIUS,
                    ) -> tuple[CourseGeometry, CoinSet]:
    """One of the four built-in routes plus its equally-spaced coins."""
    line = Polyline(route_points(route, length))
    course = CourseGeometry(centerline=line, corridor_half_width=half_width)
    return course, place_coins(line, spacing, pickup_radius)


def course_from_points(points: list[Point], spacing: float,
                       half_width: float = DEFAULT_HALF_WIDTH,
                       pickup_radius: float = DEFAULT_PICKUP_RADIUS,
                       ) -> tuple[CourseGeometry, CoinSet]:
    line = Polyline(points)
    course = CourseGeometry(centerline=line, corridor_half_width=half_width)
    return course, place_coins(line, spacing, pickup_radius)


# --- pickup and trial lifecycle ---

def update_pickup(x: float, y: float, coins: CoinSet) -> list[int]:
    """Collect every uncollected coin within pickup radius; exactly-once each.

    Returns the indices collected this call.
    """
    hit = []
    r2 = coins.pickup_radius * coins.pickup_radius
    for i, c in enumerate(coins.coins):
        if not c.collected and (x - c.x) ** 2 + (y - c.y) ** 2 <= r2:
            c.collected = True
            hit.append(i)
    return hit


def update_trial(trial: TrialStatus, progress: float, total_length: float,
                 coins_collected: int, tick: int) -> str | None:
    """Advance the trial phase machine; returns "complete" on the transition."""
    trial.coins_collected = coins_collected
    if trial.phase == "training" and progress > 0.0:
        trial.phase = "running"
    if trial.phase == "running" and progress >= total_length:
        trial.phase = "complete"
        trial.end_tick = tick
        return "complete"
    return None


def abort_trial(trial: TrialStatus, tick: int) -> bool:
    """Operator stop: terminal unless the trial already ended."""
    if trial.phase in ("training", "running"):
        trial.phase = "aborted"
        trial.end_tick = tick
        return True
    return False


# --- course file IO (same structured-text notation as the wire schema) ---

def course_to_dict(course: CourseGeometry, coins: CoinSet) -> dict:
    return {
        "points": [[x, y] for x, y in course.centerline.points],
        "spacing": coins.spacing,
        "half_width": course.corridor_half_width,
        "pickup_radius": coins.pickup_radius,
        "length": course.total_length,
        "coins": [[c.arc_pos, c.x, c.y] for c in coins.coins],
    }


def load_course_file(path: str | Path) -> tuple[CourseGeometry, CoinSet]:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read course file {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid course file {path}: {exc}") from exc
    if not isinstance(obj, dict) or "points" not in obj or "spacing" not in obj:
        raise ConfigError("course file must contain 'points' and 'spacing'")
    pts = obj["points"]
    if (not isinstance(pts, list) or len(pts) < 2
            or not all(isinstance(p, list) and len(p) == 2 for p in pts)):
        raise ConfigError("course points must be a list of [x, y] pairs")
    try:
        return course_from_points(
            [(float(x), float(y)) for x, y in pts],
            spacing=float(obj["spacing"]),
            half_width=float(obj.get("half_width", DEFAULT_HALF_WIDTH)),
            pickup_radius=float(obj.get("pickup_radius", DEFAULT_PICKUP_RADIUS)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid course file {path}: {exc}") from exc
