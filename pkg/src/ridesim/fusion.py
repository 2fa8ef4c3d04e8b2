"""Orientation estimation from raw 9-DoF samples plus jitter smoothing.

Static estimator only: pitch/roll from the gravity direction, yaw from the
tilt-compensated magnetometer, referenced to the virtual world's +x axis.
Gyro samples are accepted on the wire but unused here; senders that fuse
onboard bypass this module entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateInput

STANDARD_GRAVITY = 9.80665  # m/s^2
_FREEFALL_FRACTION = 0.1

Vec3 = tuple[float, float, float]


def wrap_deg(angle: float) -> float:
    """Normalize an angle in degrees to (-180, 180]."""
    if -180.0 < angle <= 180.0:
        return angle
    return 180.0 - (180.0 - angle) % 360.0


@dataclass(frozen=True)
class OrientationEstimate:
    """Pitch/roll/yaw in degrees; yaw normalized to (-180, 180]."""

    pitch_deg: float
    roll_deg: float
    yaw_deg: float
    source: str = "computed"  # "onboard" | "computed"


def estimate_static(accel: Vec3, mag: Vec3) -> OrientationEstimate:
    """Estimate orientation from a static accelerometer + magnetometer sample.

    pitch = atan2(-ax, sqrt(ay^2 + az^2)), roll = atan2(ay, az); yaw is the
    magnetometer heading after de-rotating by the estimated pitch and roll.
    Raises DegenerateInput when the accel magnitude is below 0.1 g (free fall).
    """
    ax, ay, az = accel
    if math.hypot(ax, ay, az) < _FREEFALL_FRACTION * STANDARD_GRAVITY:
        raise DegenerateInput("accel magnitude below 0.1 g, orientation undefined")

    pitch = math.atan2(-ax, math.hypot(ay, az))
    roll = math.atan2(ay, az)

    mx, my, mz = mag
    sp, cp = math.sin(pitch), math.cos(pitch)
    sr, cr = math.sin(roll), math.cos(roll)
    # rotate mag into the horizontal plane: Ry(pitch) @ Rx(roll) @ m
    mx_h = mx * cp + my * sr * sp + mz * cr * sp
    my_h = my * cr - mz * sr
    yaw = math.atan2(-my_h, mx_h)

    return OrientationEstimate(
        pitch_deg=math.degrees(pitch),
        roll_deg=math.degrees(roll),
        yaw_deg=wrap_deg(math.degrees(yaw)),
        source="computed",
    )


class OrientationFilter:
    """First-order EMA smoother; yaw blends along the shortest angular arc.

    The first observation seeds the filter and passes through unchanged.
    Single-writer: owned by the session tick loop.
    """

    def __init__(self, alpha: float = 0.2):
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {alpha}")
        self.alpha = alpha
        self.last: OrientationEstimate | None = None

    def reset(self) -> None:
        self.last = None

    def smooth(self, obs: OrientationEstimate) -> OrientationEstimate:
        if self.last is None:
            self.last = obs
            return obs
        a = self.alpha
        last = self.last
        out = OrientationEstimate(
            pitch_deg=a * obs.pitch_deg + (1.0 - a) * last.pitch_deg,
            roll_deg=a * obs.roll_deg + (1.0 - a) * last.roll_deg,
            yaw_deg=wrap_deg(last.yaw_deg + a * wrap_deg(obs.yaw_deg - last.yaw_deg)),
            source=obs.source,
        )
        self.last = out
        return out
