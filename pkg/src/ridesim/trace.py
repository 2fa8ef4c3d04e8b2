"""Scripted sensor traces: the desk-scale stand-in for a physical rider.

A trace is a list of (tick, message) pairs with non-decreasing ticks, stored
as JSON lines. ``run_script`` feeds one into a fresh engine unpaced.
``make_centerline_trace`` synthesizes a rider for any vehicle/route pair by
closed-loop path following against the engine itself (curvature feedforward
plus heading and cross-track feedback), emitting only the channels that
vehicle's mapping reads.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from . import wire
from .config import EngineConfig
from .dynamics import wrap_rad
from .errors import ConfigError
from .session import Engine
from .telemetry import LogWriter

TracePair = tuple[int, wire.WireMessage]

DEFAULT_SCRIPT_GRACE_TICKS = 2000


def save_trace(trace: list[TracePair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tick, msg in trace:
            fh.write(json.dumps({"tick": tick, "msg": wire.to_obj(msg)},
                                separators=(",", ":")) + "\n")


def load_trace(path: str | Path) -> list[TracePair]:
    trace: list[TracePair] = []
    last_tick = 0
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read trace file {path}: {exc}") from exc
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            tick = obj["tick"]
            msg = wire.from_obj(obj["msg"])
        except Exception as exc:
            raise ConfigError(f"{path}:{i}: bad trace record: {exc}") from exc
        if type(tick) is not int or tick < last_tick:
            raise ConfigError(f"{path}:{i}: trace ticks must be non-decreasing")
        last_tick = tick
        trace.append((tick, msg))
    return trace


def run_script(cfg: EngineConfig, trace: list[TracePair],
               max_ticks: int | None = None,
               log_path: str | Path | None = None) -> dict:
    """Run a session with the trace as its only input; unpaced.

    Stops when the trial reaches a terminal phase or max_ticks elapse.
    """
    by_tick: dict[int, list[wire.WireMessage]] = {}
    last_tick = 0
    for tick, msg in trace:
        by_tick.setdefault(tick, []).append(msg)
        last_tick = max(last_tick, tick)
    if max_ticks is None:
        max_ticks = last_tick + DEFAULT_SCRIPT_GRACE_TICKS

    log = LogWriter(log_path, cfg) if log_path else None
    engine = Engine(cfg, log=log)
    try:
        for t in range(max_ticks):
            for msg in by_tick.get(t, ()):
                engine.inject(msg)
            engine.tick()
            if engine.trial.phase in ("complete", "aborted"):
                break
        engine.shutdown()
    finally:
        if log is not None:
            log.close()
    return engine.summary()


# --- synthetic rider ---

def _dead_zone_inverse(y: float, t: float) -> float:
    """Preimage of the dead-zone ramp: dz(dz_inv(y)) == y."""
    if y == 0.0:
        return 0.0
    return math.copysign(abs(y) * (1.0 - t) + t, y)


class _RiderEmitter:
    """Builds the sensor messages that make the active mapping produce
    a desired (steering, velocity) command under a given profile."""

    def __init__(self, cfg: EngineConfig, vehicle: str, sender: str):
        self.vehicle = vehicle
        self.sender = sender
        self.params = cfg.mappings[vehicle]
        self.profile = cfg.profiles[vehicle]
        self.seq = 0

    def _next(self) -> int:
        self.seq += 1
        return self.seq

    def _to_raw(self, norm: float, lo: int, hi: int) -> int:
        return round(min(1.0, max(0.0, norm)) * (hi - lo) + lo)

    def messages(self, tick: int, steering: float,
                 velocity: float) -> list[wire.WireMessage]:
        t_ms = tick * 10.0
        dz = self.profile.dead_zone
        p = self.params
        s_pre = _dead_zone_inverse(steering, dz)
        v_pre = _dead_zone_inverse(velocity, dz)
        if self.vehicle == "escooter":
            return [
                wire.imu_euler(self.sender, self._next(), t_ms,
                               0.0, 0.0, s_pre * p.yaw_full_scale),
                wire.throttle(self.sender, self._next(), t_ms,
                              self._to_raw(max(0.0, velocity),
                                           self.profile.throttle_min,
                                           self.profile.throttle_max)),
            ]
        if self.vehicle == "segway":
            front = 0.5 + v_pre / 2.0
            rear = 0.5 - v_pre / 2.0
            return [
                wire.imu_euler(self.sender, self._next(), t_ms,
                               0.0, s_pre * p.roll_full_scale, 0.0),
                wire.fsr(self.sender, self._next(), t_ms,
                         self._to_raw(front, self.profile.fsr_baseline_front,
                                      self.profile.fsr_max_front),
                         self._to_raw(rear, self.profile.fsr_baseline_rear,
                                      self.profile.fsr_max_rear)),
            ]
        if self.vehicle == "unicycle":
            return [wire.imu_euler(self.sender, self._next(), t_ms,
                                   v_pre * p.pitch_full_scale, 0.0,
                                   s_pre * p.yaw_full_scale)]
        # skateboard
        return [wire.imu_euler(self.sender, self._next(), t_ms,
                               v_pre * p.pitch_full_scale,
                               s_pre * p.roll_full_scale, 0.0)]


def make_centerline_trace(cfg: EngineConfig, vehicle: str,
                          sender: str = "rider",
                          cruise: float | None = None,
                          max_gen_ticks: int = 120_000) -> list[TracePair]:
    """Synthesize a trace that follows the route centerline to completion.

    Co-simulates against the engine so the recorded messages reproduce the
    same run when scripted back (the engine is deterministic).
    """
    import dataclasses

    run_cfg = dataclasses.replace(cfg, vehicle=vehicle)
    engine = Engine(run_cfg, log=None)
    emitter = _RiderEmitter(cfg, vehicle, sender)
    vp = cfg.vehicles[vehicle]
    if cruise is None:
        cruise = 0.75 * vp.v_max
    line = engine.course.centerline
    total = line.length

    trace: list[TracePair] = []
    for t in range(max_gen_ticks):
        vs = engine.vstate
        progress = engine.progress
        s_here = min(progress, total)

        # curvature-limited speed over the next few meters
        v_lim = vp.v_max
        kappa_here = 0.0
        span = 8.0
        ds = 1.0
        steps = int(span / ds)
        tan_prev = line.tangent_at(s_here)
        for i in range(1, steps + 1):
            s_i = s_here + i * ds
            if s_i > total:
                break
            tan_i = line.tangent_at(s_i)
            kappa = abs(wrap_rad(tan_i - tan_prev)) / ds
            if i <= 2:
                kappa_here = max(kappa_here, kappa)
            if kappa > 1e-6:
                v_lim = min(v_lim, 0.6 * vp.omega_max / kappa)
            tan_prev = tan_i
        speed_goal = min(cruise, max(1.0, v_lim))
        velocity = min(1.0, speed_goal / vp.v_max)

        # steering: curvature feedforward + heading and cross-track feedback
        preview = min(s_here + max(1.5, 0.3 * abs(vs.speed)), total)
        px, py = line.point_at(preview)
        heading_err = wrap_rad(math.atan2(py - vs.y, px - vs.x) - vs.heading)
        s_near, _ = line.nearest((vs.x, vs.y), s_here - 5.0, s_here + 5.0)
        tx, ty = line.point_at(s_near)
        tangent = line.tangent_at(s_near)
        cross = -(vs.x - tx) * math.sin(tangent) + (vs.y - ty) * math.cos(tangent)
        d_tan = 1.0 if s_near + 1.0 <= total else -1.0
        kappa_sign = wrap_rad((line.tangent_at(s_near + d_tan) - tangent) * d_tan)
        steer_ff = vs.speed * math.copysign(kappa_here, kappa_sign) / vp.omega_max
        steering = max(-1.0, min(1.0, steer_ff + 2.0 * heading_err - 0.35 * cross))

        msgs = emitter.messages(t, steering, velocity)
        for msg in msgs:
            trace.append((t, msg))
            engine.inject(msg)
        engine.tick()
        if engine.trial.phase == "complete":
            return trace
    raise RuntimeError(
        f"centerline trace for {vehicle} did not complete within {max_gen_ticks} ticks")


def make_offcourse_trace(cfg: EngineConfig, vehicle: str = "escooter",
                         sender: str = "rider", ticks: int = 1500) -> list[TracePair]:
    """Full speed, frozen steering: guaranteed to leave the corridor."""
    emitter = _RiderEmitter(cfg, vehicle, sender)
    trace: list[TracePair] = []
    for t in range(ticks):
        for msg in emitter.messages(t, 0.0, 1.0):
            trace.append((t, msg))
    return trace
