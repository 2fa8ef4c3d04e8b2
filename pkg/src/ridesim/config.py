"""Session configuration: defaults, file loading, canonical form, hashing.

The canonical dict fully determines engine behavior; its hash goes into every
log header so replays can refuse configuration drift.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import calibration, scenario
from .calibration import CalibrationProfile
from .dynamics import DEFAULT_VEHICLE_PARAMS, VehicleParams
from .errors import ConfigError
from .mapping import DEFAULT_MAPPING_PARAMS, MappingParams
from .wire import VEHICLES

ENGINE_VERSION = "1.0"

DEFAULT_TICK_RATE = 100.0
DEFAULT_STALE_TICKS = 50
DEFAULT_LISTEN = "127.0.0.1:8098"


@dataclass
class EngineConfig:
    """Everything the deterministic core needs; serializes canonically."""

    tick_rate: float = DEFAULT_TICK_RATE
    stale_threshold: int = DEFAULT_STALE_TICKS
    vehicle: str | None = None
    route: int = 1
    spacing: float = scenario.DEFAULT_SPACING
    half_width: float = scenario.DEFAULT_HALF_WIDTH
    course_length: float = scenario.DEFAULT_LENGTH
    pickup_radius: float = scenario.DEFAULT_PICKUP_RADIUS
    course_points: list[list[float]] | None = None
    filter_alpha: float = 0.2
    vehicles: dict[str, VehicleParams] = field(
        default_factory=lambda: dict(DEFAULT_VEHICLE_PARAMS))
    mappings: dict[str, MappingParams] = field(
        default_factory=lambda: dict(DEFAULT_MAPPING_PARAMS))
    profiles: dict[str, CalibrationProfile] = field(
        default_factory=lambda: {v: CalibrationProfile() for v in VEHICLES})

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate

    def validate(self) -> None:
        if not self.tick_rate > 0:
            raise ConfigError(f"tick_rate must be positive, got {self.tick_rate}")
        if self.stale_threshold < 1:
            raise ConfigError(f"stale_threshold must be >= 1, got {self.stale_threshold}")
        if self.vehicle is not None and self.vehicle not in VEHICLES:
            raise ConfigError(
                f"vehicle must be one of {list(VEHICLES)}, got {self.vehicle!r}")
        if self.course_points is None and self.route not in scenario.ROUTE_IDS:
            raise ConfigError(f"route must be one of {scenario.ROUTE_IDS}, got {self.route}")
        if self.spacing <= 0:
            raise ConfigError("spacing must be positive")
        if self.half_width <= 0 or self.pickup_radius <= 0 or self.course_length <= 0:
            raise ConfigError("course dimensions must be positive")
        if not 0.0 < self.filter_alpha <= 1.0:
            raise ConfigError("filter_alpha must be in (0, 1]")
        for name in VEHICLES:
            if name not in self.vehicles or name not in self.mappings:
                raise ConfigError(f"missing parameters for vehicle {name!r}")
            try:
                self.vehicles[name].validate()
            except ValueError as exc:
                raise ConfigError(f"vehicle {name!r}: {exc}") from exc
            self.profiles[name].validate()

    def build_course(self):
        if self.course_points is not None:
            return scenario.course_from_points(
                [(p[0], p[1]) for p in self.course_points],
                spacing=self.spacing, half_width=self.half_width,
                pickup_radius=self.pickup_radius)
        return scenario.generate_course(
            self.route, spacing=self.spacing, half_width=self.half_width,
            length=self.course_length, pickup_radius=self.pickup_radius)

    def canonical_dict(self) -> dict[str, Any]:
        return {
            "engine_version": ENGINE_VERSION,
            "tick_rate": self.tick_rate,
            "stale_threshold": self.stale_threshold,
            "vehicle": self.vehicle,
            "route": self.route,
            "spacing": self.spacing,
            "half_width": self.half_width,
            "course_length": self.course_length,
            "pickup_radius": self.pickup_radius,
            "course_points": self.course_points,
            "filter_alpha": self.filter_alpha,
            "vehicles": {
                name: {"v_max": p.v_max, "a_accel": p.a_accel,
                       "a_decel": p.a_decel, "omega_max": p.omega_max}
                for name, p in sorted(self.vehicles.items())
            },
            "mappings": {
                name: {"yaw_full_scale": m.yaw_full_scale,
                       "roll_full_scale": m.roll_full_scale,
                       "pitch_full_scale": m.pitch_full_scale}
                for name, m in sorted(self.mappings.items())
            },
            "calibration": {
                name: calibration.profile_to_dict(p)
                for name, p in sorted(self.profiles.items())
            },
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True,
                          separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def config_from_dict(obj: dict[str, Any]) -> EngineConfig:
    """Rebuild an EngineConfig from its canonical dict (log headers, files)."""
    if not isinstance(obj, dict):
        raise ConfigError("configuration must be an object")
    cfg = EngineConfig()
    scalar_fields = {
        "tick_rate": float, "stale_threshold": int, "route": int,
        "spacing": float, "half_width": float, "course_length": float,
        "pickup_radius": float, "filter_alpha": float,
    }
    known = set(scalar_fields) | {
        "engine_version", "vehicle", "course_points", "vehicles",
        "mappings", "calibration", "course_file",
    }
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    for name, cast in scalar_fields.items():
        if name in obj:
            try:
                setattr(cfg, name, cast(obj[name]))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {name!r}: {obj[name]!r}") from exc
    if "vehicle" in obj:
        cfg.vehicle = obj["vehicle"]
    if obj.get("course_points") is not None:
        cfg.course_points = [[float(x), float(y)] for x, y in obj["course_points"]]
    if obj.get("course_file"):
        # inline the file so the canonical config stays self-contained
        loaded = json.loads(Path(obj["course_file"]).read_text())
        cfg.course_points = [[float(x), float(y)] for x, y in loaded["points"]]
        cfg.spacing = float(loaded.get("spacing", cfg.spacing))
        cfg.half_width = float(loaded.get("half_width", cfg.half_width))
        cfg.pickup_radius = float(loaded.get("pickup_radius", cfg.pickup_radius))
    for name, params in obj.get("vehicles", {}).items():
        if name not in VEHICLES:
            raise ConfigError(f"unknown vehicle {name!r} in config")
        base = cfg.vehicles[name]
        cfg.vehicles[name] = VehicleParams(
            v_max=float(params.get("v_max", base.v_max)),
            a_accel=float(params.get("a_accel", base.a_accel)),
            a_decel=float(params.get("a_decel", base.a_decel)),
            omega_max=float(params.get("omega_max", base.omega_max)),
        )
    for name, params in obj.get("mappings", {}).items():
        if name not in VEHICLES:
            raise ConfigError(f"unknown vehicle {name!r} in mappings")
        base = cfg.mappings[name]
        cfg.mappings[name] = MappingParams(
            yaw_full_scale=float(params.get("yaw_full_scale", base.yaw_full_scale)),
            roll_full_scale=float(params.get("roll_full_scale", base.roll_full_scale)),
            pitch_full_scale=float(params.get("pitch_full_scale", base.pitch_full_scale)),
            dead_zone=base.dead_zone,
        )
    for name, prof in obj.get("calibration", {}).items():
        if name not in VEHICLES:
            raise ConfigError(f"unknown vehicle {name!r} in calibration")
        cfg.profiles[name] = calibration.profile_from_dict(prof)
    cfg.validate()
    return cfg


def load_config(path: str | Path | None = None,
                overrides: dict[str, Any] | None = None) -> EngineConfig:
    """Defaults, then the config file, then explicit overrides (CLI flags)."""
    obj: dict[str, Any] = {}
    if path is not None:
        try:
            obj = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"invalid config file {path}: {exc}") from exc
    if overrides:
        obj.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(obj)
