"""Fixed-timestep kinematic vehicle model with corridor collision handling.

Pure functions only: two runs over the same inputs produce bitwise-identical
states. Heading rate is independent of speed (kinematic, not dynamic), and
failures reset conservatively: zero speed, snap back onto the centerline, no
orientation-disturbing animation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .mapping import ControlInput
    from .scenario import CourseGeometry


def wrap_rad(angle: float) -> float:
    """Normalize an angle in radians to (-pi, pi]."""
    if -math.pi < angle <= math.pi:
        return angle
    return math.pi - (math.pi - angle) % (2.0 * math.pi)


@dataclass(frozen=True)
class VehicleParams:
    v_max: float = 6.0       # m/s
    a_accel: float = 2.0     # m/s^2
    a_decel: float = 3.0     # m/s^2
    omega_max: float = 1.2   # rad/s

    def validate(self) -> None:
        if min(self.v_max, self.a_accel, self.a_decel, self.omega_max) <= 0:
            raise ValueError("vehicle parameters must be strictly positive")
        if self.a_decel < self.a_accel:
            raise ValueError("a_decel must be >= a_accel")


# configuration values, not ground truth
DEFAULT_VEHICLE_PARAMS = {
    "escooter": VehicleParams(v_max=6.0),
    "segway": VehicleParams(v_max=3.5),
    "unicycle": VehicleParams(v_max=5.0),
    "skateboard": VehicleParams(v_max=5.5),
}


@dataclass(frozen=True)
class VehicleState:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0  # radians in (-pi, pi]
    speed: float = 0.0    # m/s, signed
    tick: int = 0


def step(s: VehicleState, c: "ControlInput", p: VehicleParams, dt: float) -> VehicleState:
    """Advance one fixed tick: speed ramp, heading update, then translation.

    Speed moves toward velocity_cmd * v_max, rate-limited by a_accel while
    gaining magnitude in the commanded direction and a_decel otherwise.
    Position integrates along the post-update heading.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    v_target = c.velocity_cmd * p.v_max
    if v_target * s.speed >= 0.0 and abs(v_target) > abs(s.speed):
        rate = p.a_accel
    else:
        rate = p.a_decel
    if v_target > s.speed:
        speed = min(s.speed + rate * dt, v_target)
    else:
        speed = max(s.speed - rate * dt, v_target)
    speed = min(p.v_max, max(-p.v_max, speed))

    heading = wrap_rad(s.heading + c.steering * p.omega_max * dt)
    return VehicleState(
        x=s.x + speed * dt * math.cos(heading),
        y=s.y + speed * dt * math.sin(heading),
        heading=heading,
        speed=speed,
        tick=s.tick + 1,
    )


@dataclass(frozen=True)
class CollisionEvent:
    x: float
    y: float
    distance: float  # lateral offset from the centerline at impact


def check_collision(s: VehicleState, course: "CourseGeometry") -> CollisionEvent | None:
    """Collision iff the vehicle has left the route corridor."""
    d = course.centerline.distance_to((s.x, s.y))
    if d > course.corridor_half_width:
        return CollisionEvent(x=s.x, y=s.y, distance=d)
    return None


def resolve_fail(s: VehicleState, course: "CourseGeometry",
                 progress: float) -> tuple[VehicleState, float]:
    """Respawn after a collision: nearest centerline point at or behind progress.

    Returns the reset state (zero speed, heading along the route tangent) and
    the respawn arc position.
    """
    line = course.centerline
    s_r, _ = line.nearest((s.x, s.y), 0.0, min(progress, line.length))
    x, y = line.point_at(s_r)
    return VehicleState(
        x=x, y=y,
        heading=line.tangent_at(s_r),
        speed=0.0,
        tick=s.tick,
    ), s_r
