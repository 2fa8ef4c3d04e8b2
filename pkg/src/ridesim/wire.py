"""Framed message format shared by sensor sources, the session engine, and clients.

One message is one newline-terminated JSON object with a flat field layout:
the common fields (``kind``, ``sender``, ``seq``, ``t_ms``) followed by the
kind-specific payload fields. Field names are contractual. Encoding is
deterministic: fields are emitted in schema order, so equal messages produce
byte-identical frames.

Decode is total over arbitrary byte input: it either returns a validated
:class:`WireMessage` or raises exactly one of :class:`MalformedFrame`,
:class:`UnknownKind`, :class:`SchemaViolation`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import MalformedFrame, SchemaViolation, UnknownKind

ADC_MAX = 4095  # 12-bit sensor range
SEQ_MAX = 2**64 - 1
SENDER_MAX_LEN = 64

VEHICLES = ("escooter", "segway", "unicycle", "skateboard")
CALIBRATE_PHASES = (
    "fsr_baseline_begin",
    "fsr_baseline_end",
    "fsr_max_begin",
    "fsr_max_end",
    "imu_zero",
)
EVENT_NAMES = ("coin", "collision", "respawn", "trial_complete", "stale_drop", "calibrated")

IMU_EULER_FIELDS = ("pitch", "roll", "yaw")
IMU_RAW_FIELDS = ("ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz")


@dataclass(frozen=True)
class WireMessage:
    """One decoded frame: common header plus kind-specific payload map."""

    kind: str
    sender: str
    seq: int
    t_ms: float
    payload: dict[str, Any] = field(default_factory=dict)


def _is_number(v: Any) -> bool:
    # bool is an int subclass; it is never a valid numeric field
    return type(v) in (int, float)


def _check_finite_number(name: str, v: Any) -> None:
    if not _is_number(v) or not math.isfinite(v):
        raise SchemaViolation(f"field {name!r} must be a finite number")


def _check_angle(name: str, v: Any) -> None:
    _check_finite_number(name, v)
    if abs(v) > 180.0:
        raise SchemaViolation(f"angle {name!r} out of range [-180, 180]: {v}")


def _check_adc(name: str, v: Any) -> None:
    if type(v) is not int or not 0 <= v <= ADC_MAX:
        raise SchemaViolation(f"field {name!r} must be an integer in [0, {ADC_MAX}]")


def _check_count(name: str, v: Any) -> None:
    if type(v) is not int or v < 0:
        raise SchemaViolation(f"field {name!r} must be a non-negative integer")


def _check_unit_cmd(name: str, v: Any) -> None:
    _check_finite_number(name, v)
    if abs(v) > 1.0:
        raise SchemaViolation(f"command {name!r} out of range [-1, 1]: {v}")


def _validate_imu(p: dict[str, Any]) -> tuple[str, ...]:
    mode = p.get("mode")
    if mode == "euler":
        for name in IMU_EULER_FIELDS:
            if name not in p:
                raise SchemaViolation(f"imu euler payload missing {name!r}")
            _check_angle(name, p[name])
        return ("mode",) + IMU_EULER_FIELDS
    if mode == "raw":
        for name in IMU_RAW_FIELDS:
            if name not in p:
                raise SchemaViolation(f"imu raw payload missing {name!r}")
            _check_finite_number(name, p[name])
        return ("mode",) + IMU_RAW_FIELDS
    raise SchemaViolation(f"imu mode must be 'euler' or 'raw', got {mode!r}")


def _validate_fsr(p: dict[str, Any]) -> tuple[str, ...]:
    for name in ("front", "rear"):
        if name not in p:
            raise SchemaViolation(f"fsr payload missing {name!r}")
        _check_adc(name, p[name])
    return ("front", "rear")


def _validate_throttle(p: dict[str, Any]) -> tuple[str, ...]:
    if "raw" not in p:
        raise SchemaViolation("throttle payload missing 'raw'")
    _check_adc("raw", p["raw"])
    return ("raw",)


def _validate_set_vehicle(p: dict[str, Any]) -> tuple[str, ...]:
    if p.get("vehicle") not in VEHICLES:
        raise SchemaViolation(f"vehicle must be one of {VEHICLES}, got {p.get('vehicle')!r}")
    return ("vehicle",)


def _validate_calibrate(p: dict[str, Any]) -> tuple[str, ...]:
    if p.get("phase") not in CALIBRATE_PHASES:
        raise SchemaViolation(f"phase must be one of {CALIBRATE_PHASES}, got {p.get('phase')!r}")
    return ("phase",)


_STATE_FIELDS = (
    "tick", "x", "y", "heading", "speed",
    "steering_cmd", "velocity_cmd", "coins_collected", "coins_total",
)


def _validate_state(p: dict[str, Any]) -> tuple[str, ...]:
    for name in _STATE_FIELDS:
        if name not in p:
            raise SchemaViolation(f"state payload missing {name!r}")
    _check_count("tick", p["tick"])
    for name in ("x", "y", "heading", "speed"):
        _check_finite_number(name, p[name])
    _check_unit_cmd("steering_cmd", p["steering_cmd"])
    _check_unit_cmd("velocity_cmd", p["velocity_cmd"])
    _check_count("coins_collected", p["coins_collected"])
    _check_count("coins_total", p["coins_total"])
    if p["coins_collected"] > p["coins_total"]:
        raise SchemaViolation("coins_collected exceeds coins_total")
    return _STATE_FIELDS


def _validate_event(p: dict[str, Any]) -> tuple[str, ...]:
    for name in ("tick", "name", "detail"):
        if name not in p:
            raise SchemaViolation(f"event payload missing {name!r}")
    _check_count("tick", p["tick"])
    if p["name"] not in EVENT_NAMES:
        raise SchemaViolation(f"event name must be one of {EVENT_NAMES}, got {p['name']!r}")
    if not isinstance(p["detail"], dict):
        raise SchemaViolation("event detail must be an object")
    return ("tick", "name", "detail")


def _check_ref_seq(p: dict[str, Any]) -> None:
    v = p.get("ref_seq")
    if type(v) is not int or not 0 <= v <= SEQ_MAX:
        raise SchemaViolation("ref_seq must be an unsigned 64-bit integer")


def _validate_ack(p: dict[str, Any]) -> tuple[str, ...]:
    if "ref_seq" not in p:
        raise SchemaViolation("ack payload missing 'ref_seq'")
    _check_ref_seq(p)
    return ("ref_seq",)


def _validate_error(p: dict[str, Any]) -> tuple[str, ...]:
    for name in ("ref_seq", "message"):
        if name not in p:
            raise SchemaViolation(f"error payload missing {name!r}")
    _check_ref_seq(p)
    if not isinstance(p["message"], str):
        raise SchemaViolation("error message must be a string")
    return ("ref_seq", "message")


def _validate_hello(p: dict[str, Any]) -> tuple[str, ...]:
    return ()


# kind -> validator returning the canonical payload field order
_VALIDATORS: dict[str, Callable[[dict[str, Any]], tuple[str, ...]]] = {
    "hello": _validate_hello,
    "imu": _validate_imu,
    "fsr": _validate_fsr,
    "throttle": _validate_throttle,
    "set_vehicle": _validate_set_vehicle,
    "calibrate": _validate_calibrate,
    "state": _validate_state,
    "event": _validate_event,
    "ack": _validate_ack,
    "error": _validate_error,
}

KINDS = tuple(_VALIDATORS)
_COMMON_FIELDS = ("kind", "sender", "seq", "t_ms")


def validate(msg: WireMessage) -> tuple[str, ...]:
    """Validate a message against its kind schema.

    Returns the canonical payload field order; raises on any violation.
    """
    if msg.kind not in _VALIDATORS:
        raise UnknownKind(f"unknown message kind {msg.kind!r}")
    if not isinstance(msg.sender, str) or not 1 <= len(msg.sender) <= SENDER_MAX_LEN:
        raise SchemaViolation("sender must be a string of 1..64 characters")
    if type(msg.seq) is not int or not 0 <= msg.seq <= SEQ_MAX:
        raise SchemaViolation("seq must be an unsigned 64-bit integer")
    if not _is_number(msg.t_ms) or not math.isfinite(msg.t_ms) or msg.t_ms < 0:
        raise SchemaViolation("t_ms must be a finite non-negative number")
    order = _VALIDATORS[msg.kind](msg.payload)
    extra = set(msg.payload) - set(order)
    if extra:
        raise SchemaViolation(f"unknown fields for kind {msg.kind!r}: {sorted(extra)}")
    return order


def encode(msg: WireMessage) -> bytes:
    """Encode one message as a newline-terminated frame with deterministic field order."""
    obj = to_obj(msg)
    try:
        text = json.dumps(obj, ensure_ascii=False, separators=(",", ":"), allow_nan=False)
    except ValueError as exc:
        raise SchemaViolation(f"unserializable payload: {exc}") from exc
    return text.encode("utf-8") + b"\n"


def _reject_nan(token: str) -> None:
    raise ValueError(f"non-finite constant {token!r}")


def from_obj(obj: dict[str, Any]) -> WireMessage:
    """Build and schema-validate a message from one flat frame object."""
    for name in _COMMON_FIELDS:
        if name not in obj:
            raise SchemaViolation(f"missing common field {name!r}")
    kind = obj["kind"]
    if not isinstance(kind, str):
        raise SchemaViolation("kind must be a string")
    if kind not in _VALIDATORS:
        raise UnknownKind(f"unknown message kind {kind!r}")

    payload = {k: v for k, v in obj.items() if k not in _COMMON_FIELDS}
    msg = WireMessage(kind=kind, sender=obj["sender"], seq=obj["seq"],
                      t_ms=obj["t_ms"], payload=payload)
    validate(msg)
    return msg


def to_obj(msg: WireMessage) -> dict[str, Any]:
    """Flat frame object in canonical field order (validates first)."""
    order = validate(msg)
    obj: dict[str, Any] = {
        "kind": msg.kind,
        "sender": msg.sender,
        "seq": msg.seq,
        "t_ms": msg.t_ms,
    }
    for name in order:
        obj[name] = msg.payload[name]
    return obj


def decode(frame: bytes | str) -> WireMessage:
    """Decode and schema-validate one complete frame."""
    if isinstance(frame, (bytes, bytearray)):
        try:
            text = bytes(frame).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedFrame(f"frame is not valid UTF-8: {exc}") from exc
    elif isinstance(frame, str):
        text = frame
    else:
        raise MalformedFrame(f"frame must be bytes or str, got {type(frame).__name__}")

    text = text.rstrip("\r\n")
    if not text or "\n" in text or "\r" in text:
        raise MalformedFrame("frame must contain exactly one message line")
    try:
        obj = json.loads(text, parse_constant=_reject_nan)
    except (ValueError, RecursionError) as exc:
        raise MalformedFrame(f"unparseable frame: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedFrame("frame is not an object")
    return from_obj(obj)


def accept_seq(last_seq: int | None, msg: WireMessage) -> bool:
    """Per-sender ordering gate: accept only strictly increasing seq numbers."""
    return last_seq is None or msg.seq > last_seq


# --- construction helpers ---

def imu_euler(sender: str, seq: int, t_ms: float,
              pitch: float, roll: float, yaw: float) -> WireMessage:
    return WireMessage("imu", sender, seq, t_ms,
                       {"mode": "euler", "pitch": pitch, "roll": roll, "yaw": yaw})


def imu_raw(sender: str, seq: int, t_ms: float,
            accel: tuple[float, float, float],
            gyro: tuple[float, float, float],
            mag: tuple[float, float, float]) -> WireMessage:
    ax, ay, az = accel
    gx, gy, gz = gyro
    mx, my, mz = mag
    return WireMessage("imu", sender, seq, t_ms,
                       {"mode": "raw", "ax": ax, "ay": ay, "az": az,
                        "gx": gx, "gy": gy, "gz": gz, "mx": mx, "my": my, "mz": mz})


def fsr(sender: str, seq: int, t_ms: float, front: int, rear: int) -> WireMessage:
    return WireMessage("fsr", sender, seq, t_ms, {"front": front, "rear": rear})


def throttle(sender: str, seq: int, t_ms: float, raw: int) -> WireMessage:
    return WireMessage("throttle", sender, seq, t_ms, {"raw": raw})


def hello(sender: str, seq: int, t_ms: float) -> WireMessage:
    return WireMessage("hello", sender, seq, t_ms, {})


def set_vehicle(sender: str, seq: int, t_ms: float, vehicle: str) -> WireMessage:
    return WireMessage("set_vehicle", sender, seq, t_ms, {"vehicle": vehicle})


def calibrate(sender: str, seq: int, t_ms: float, phase: str) -> WireMessage:
    return WireMessage("calibrate", sender, seq, t_ms, {"phase": phase})
