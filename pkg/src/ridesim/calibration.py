"""Per-rider, per-vehicle input normalization.

Covers FSR baseline/max capture, linear normalization with clamping, the
continuous dead zone, IMU zero offsets, and the signed axis permutation that
matches a sensor's mounting orientation to the virtual reference frame.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError, InsufficientSamples, InvalidBounds
from .fusion import OrientationEstimate, wrap_deg

AXES = ("pitch", "roll", "yaw")

# output axis -> (source axis, sign)
AxisMap = dict[str, tuple[str, int]]

MIN_CAPTURE_SAMPLES = 10
DEFAULT_DEAD_ZONE = 0.10


def identity_axis_map() -> AxisMap:
    return {axis: (axis, 1) for axis in AXES}


def _check_axis_map(axis_map: AxisMap) -> None:
    if sorted(axis_map) != sorted(AXES):
        raise ConfigError(f"axis_map must map exactly {AXES}")
    sources = [src for src, _ in axis_map.values()]
    if sorted(sources) != sorted(AXES):
        raise ConfigError("axis_map sources must be a permutation of the axes")
    if any(sign not in (1, -1) for _, sign in axis_map.values()):
        raise ConfigError("axis_map signs must be +1 or -1")


@dataclass
class CalibrationProfile:
    """Normalization bounds and alignment for one rider on one vehicle."""

    fsr_baseline_front: int = 0
    fsr_baseline_rear: int = 0
    fsr_max_front: int = 4095
    fsr_max_rear: int = 4095
    throttle_min: int = 0
    throttle_max: int = 4095
    imu_zero: tuple[float, float, float] = (0.0, 0.0, 0.0)  # pitch, roll, yaw degrees
    axis_map: AxisMap = field(default_factory=identity_axis_map)
    dead_zone: float = DEFAULT_DEAD_ZONE

    def validate(self) -> None:
        if self.fsr_max_front <= self.fsr_baseline_front:
            raise InvalidBounds("front FSR max must exceed baseline")
        if self.fsr_max_rear <= self.fsr_baseline_rear:
            raise InvalidBounds("rear FSR max must exceed baseline")
        if self.throttle_max <= self.throttle_min:
            raise InvalidBounds("throttle max must exceed min")
        if not 0.0 <= self.dead_zone < 0.5:
            raise ConfigError(f"dead_zone must be in [0, 0.5), got {self.dead_zone}")
        _check_axis_map(self.axis_map)

    def copy(self) -> "CalibrationProfile":
        return replace(self, imu_zero=tuple(self.imu_zero), axis_map=dict(self.axis_map))


def capture_fsr(samples: list[tuple[int, int]], phase: str) -> tuple[int, int]:
    """Reduce a capture window to per-channel means, rounded to raw units.

    ``phase`` is "baseline" or "max"; the bounds relationship is checked by
    the caller once both captures are known.
    """
    if phase not in ("baseline", "max"):
        raise ValueError(f"phase must be 'baseline' or 'max', got {phase!r}")
    if len(samples) < MIN_CAPTURE_SAMPLES:
        raise InsufficientSamples(
            f"need at least {MIN_CAPTURE_SAMPLES} samples, got {len(samples)}")
    n = len(samples)
    front = round(sum(s[0] for s in samples) / n)
    rear = round(sum(s[1] for s in samples) / n)
    return front, rear


def normalize_fsr(raw: float, baseline: float, maximum: float) -> float:
    """Linear map of raw units onto [0, 1], clamped at the calibration bounds."""
    if maximum <= baseline:
        raise InvalidBounds(f"max ({maximum}) must exceed baseline ({baseline})")
    x = (raw - baseline) / (maximum - baseline)
    return min(1.0, max(0.0, x))


def dead_zone(x: float, t: float) -> float:
    """Zero inside [-t, t], then a continuous ramp preserving the full range.

    Odd, continuous everywhere, identity when t = 0.
    """
    if not 0.0 <= t < 0.5:
        raise ValueError(f"dead zone threshold must be in [0, 0.5), got {t}")
    ax = abs(x)
    if ax <= t:
        return 0.0
    return math.copysign((ax - t) / (1.0 - t), x)


def align(euler: OrientationEstimate, profile: CalibrationProfile) -> tuple[float, float, float]:
    """Subtract the IMU zero offsets, then apply the signed axis permutation.

    Returns aligned (pitch, roll, yaw) in degrees with yaw renormalized
    to (-180, 180]. Invertible for any valid profile.
    """
    zp, zr, zy = profile.imu_zero
    offset = {
        "pitch": euler.pitch_deg - zp,
        "roll": euler.roll_deg - zr,
        "yaw": euler.yaw_deg - zy,
    }
    src_p, sgn_p = profile.axis_map["pitch"]
    src_r, sgn_r = profile.axis_map["roll"]
    src_y, sgn_y = profile.axis_map["yaw"]
    return (
        sgn_p * offset[src_p],
        sgn_r * offset[src_r],
        wrap_deg(sgn_y * offset[src_y]),
    )


# --- profile (de)serialization ---

def _axis_map_to_json(axis_map: AxisMap) -> dict[str, str]:
    return {out: ("-" if sign < 0 else "") + src for out, (src, sign) in axis_map.items()}


def axis_map_from_json(obj: dict[str, str]) -> AxisMap:
    axis_map: AxisMap = {}
    for out, spec in obj.items():
        if not isinstance(spec, str):
            raise ConfigError(f"axis_map entry for {out!r} must be a string")
        sign = 1
        src = spec.lstrip("+")
        if src.startswith("-"):
            sign = -1
            src = src[1:]
        if src not in AXES:
            raise ConfigError(f"axis_map source must be one of {AXES}, got {spec!r}")
        axis_map[out] = (src, sign)
    _check_axis_map(axis_map)
    return axis_map


def profile_to_dict(profile: CalibrationProfile) -> dict:
    return {
        "fsr_baseline_front": profile.fsr_baseline_front,
        "fsr_baseline_rear": profile.fsr_baseline_rear,
        "fsr_max_front": profile.fsr_max_front,
        "fsr_max_rear": profile.fsr_max_rear,
        "throttle_min": profile.throttle_min,
        "throttle_max": profile.throttle_max,
        "imu_zero": list(profile.imu_zero),
        "axis_map": _axis_map_to_json(profile.axis_map),
        "dead_zone": profile.dead_zone,
    }


def profile_from_dict(obj: dict) -> CalibrationProfile:
    if not isinstance(obj, dict):
        raise ConfigError("calibration profile must be an object")
    profile = CalibrationProfile()
    known = set(profile_to_dict(profile))
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"unknown calibration fields: {sorted(unknown)}")
    for name in ("fsr_baseline_front", "fsr_baseline_rear", "fsr_max_front",
                 "fsr_max_rear", "throttle_min", "throttle_max"):
        if name in obj:
            if type(obj[name]) is not int:
                raise ConfigError(f"{name} must be an integer")
            setattr(profile, name, obj[name])
    if "imu_zero" in obj:
        zero = obj["imu_zero"]
        if (not isinstance(zero, (list, tuple)) or len(zero) != 3
                or not all(isinstance(v, (int, float)) for v in zero)):
            raise ConfigError("imu_zero must be a [pitch, roll, yaw] triple")
        profile.imu_zero = (float(zero[0]), float(zero[1]), float(zero[2]))
    if "axis_map" in obj:
        profile.axis_map = axis_map_from_json(obj["axis_map"])
    if "dead_zone" in obj:
        if not isinstance(obj["dead_zone"], (int, float)):
            raise ConfigError("dead_zone must be a number")
        profile.dead_zone = float(obj["dead_zone"])
    profile.validate()
    return profile


def load_profiles(path: str | Path) -> dict[str, CalibrationProfile]:
    """Load per-vehicle profiles from a JSON file.

    The file maps vehicle names to profile objects; a "default" entry fills
    the vehicles it does not name.
    """
    from .wire import VEHICLES

    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read calibration file {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid calibration file {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("calibration file must be an object")
    unknown = set(obj) - set(VEHICLES) - {"default"}
    if unknown:
        raise ConfigError(f"unknown calibration sections: {sorted(unknown)}")
    default = profile_from_dict(obj.get("default", {}))
    profiles = {}
    for vehicle in VEHICLES:
        profiles[vehicle] = (profile_from_dict(obj[vehicle])
                             if vehicle in obj else default.copy())
    return profiles


def save_profiles(profiles: dict[str, CalibrationProfile], path: str | Path) -> None:
    obj = {vehicle: profile_to_dict(p) for vehicle, p in profiles.items()}
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
