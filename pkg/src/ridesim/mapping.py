"""Per-vehicle controllers: one pure function from sensor frame to control input.

All four mappings share the same signature and are memoryless; smoothing and
staleness handling happen upstream. Steering is positive counter-clockwise,
velocity commands are normalized to [-1, 1].

  escooter    handlebar yaw -> steering, thumb throttle -> velocity (no reverse)
  segway      handlebar roll -> steering, front/rear pressure -> velocity
  unicycle    platform pitch -> velocity, platform yaw -> steering
  skateboard  platform pitch -> velocity, platform roll -> steering
"""

from __future__ import annotations

from dataclasses import dataclass

from .calibration import dead_zone
from .errors import NoVehicleSelected


@dataclass(frozen=True)
class SensorFrame:
    """Sample-and-hold view of the latest per-channel sensor values.

    Orientation angles are aligned degrees; pressures and throttle are
    normalized to [0, 1]. Freshness counts ticks since each channel last
    updated.
    """

    pitch: float = 0.0
    roll: float = 0.0
    yaw: float = 0.0
    fsr_front: float = 0.0
    fsr_rear: float = 0.0
    throttle: float = 0.0
    fresh_orientation: int = 0
    fresh_fsr: int = 0
    fresh_throttle: int = 0


@dataclass(frozen=True)
class ControlInput:
    steering: float = 0.0
    velocity_cmd: float = 0.0


@dataclass(frozen=True)
class MappingParams:
    """Full-scale deflection angles (degrees) plus the dead-zone threshold."""

    yaw_full_scale: float = 45.0
    roll_full_scale: float = 20.0
    pitch_full_scale: float = 15.0
    dead_zone: float = 0.10


def _axis_cmd(angle: float, full_scale: float, t: float) -> float:
    return dead_zone(min(1.0, max(-1.0, angle / full_scale)), t)


def map_escooter(frame: SensorFrame, p: MappingParams) -> ControlInput:
    return ControlInput(
        steering=_axis_cmd(frame.yaw, p.yaw_full_scale, p.dead_zone),
        velocity_cmd=frame.throttle,
    )


def map_segway(frame: SensorFrame, p: MappingParams) -> ControlInput:
    return ControlInput(
        steering=_axis_cmd(frame.roll, p.roll_full_scale, p.dead_zone),
        velocity_cmd=dead_zone(frame.fsr_front - frame.fsr_rear, p.dead_zone),
    )


def map_unicycle(frame: SensorFrame, p: MappingParams) -> ControlInput:
    return ControlInput(
        steering=_axis_cmd(frame.yaw, p.yaw_full_scale, p.dead_zone),
        velocity_cmd=_axis_cmd(frame.pitch, p.pitch_full_scale, p.dead_zone),
    )


def map_skateboard(frame: SensorFrame, p: MappingParams) -> ControlInput:
    return ControlInput(
        steering=_axis_cmd(frame.roll, p.roll_full_scale, p.dead_zone),
        velocity_cmd=_axis_cmd(frame.pitch, p.pitch_full_scale, p.dead_zone),
    )


CONTROLLERS = {
    "escooter": map_escooter,
    "segway": map_segway,
    "unicycle": map_unicycle,
    "skateboard": map_skateboard,
}

# per-vehicle full-scale defaults; moderate body motion spans the command range
DEFAULT_MAPPING_PARAMS = {
    "escooter": MappingParams(yaw_full_scale=45.0),
    "segway": MappingParams(roll_full_scale=20.0),
    "unicycle": MappingParams(pitch_full_scale=15.0, yaw_full_scale=30.0),
    "skateboard": MappingParams(pitch_full_scale=15.0, roll_full_scale=15.0),
}


def active_controller(vehicle: str | None, frame: SensorFrame,
                      params: MappingParams) -> ControlInput:
    """Dispatch the frame to exactly one vehicle mapping."""
    if not vehicle:
        raise NoVehicleSelected("no vehicle selected")
    try:
        controller = CONTROLLERS[vehicle]
    except KeyError:
        raise NoVehicleSelected(f"unknown vehicle {vehicle!r}") from None
    return controller(frame, params)
