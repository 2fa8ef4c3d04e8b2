"""The centralized receiver and orchestrator.

The Engine is the deterministic core: it consumes decoded messages between
ticks (via an ordered queue in live mode, directly in script/replay mode) and
advances the pipeline fusion -> mapping -> dynamics -> scenario on a fixed
timestep. All wall-clock concerns live outside; the only clock the engine
reads is an optional stamp source used for log metadata, never for state.

Per tick, exactly one state message is produced, events are flushed after it,
and every accepted inbound message is logged at the tick that consumed it, so
a log replays into a bitwise-identical state stream.
"""

from __future__ import annotations

import dataclasses
import time
from typing import Any, Callable

from . import wire
from .calibration import CalibrationProfile, align, capture_fsr, normalize_fsr
from .config import EngineConfig
from .dynamics import VehicleState, check_collision, resolve_fail, step
from .fusion import OrientationEstimate, OrientationFilter, estimate_static
from .errors import DegenerateInput, InsufficientSamples, InvalidBounds
from .mapping import ControlInput, SensorFrame, active_controller
from .scenario import TrialStatus, abort_trial, update_pickup, update_trial
from .telemetry import LogRecord, LogWriter

SESSION_SENDER = "session"

_ORIENT, _FSR, _THROTTLE = "orientation", "fsr", "throttle"


def _mono_ms() -> float:
    return time.monotonic_ns() / 1e6


class _Channel:
    __slots__ = ("updated", "fresh")

    def __init__(self, stale: int):
        self.updated = False
        self.fresh = stale  # never-updated channels start stale


class Engine:
    """Single-threaded session core; see module docstring for the contract."""

    def __init__(self, cfg: EngineConfig, log: LogWriter | None = None,
                 clock: Callable[[], float] = _mono_ms):
        cfg.validate()
        self.cfg = cfg
        self.log = log
        self.clock = clock
        self.dt = cfg.dt
        self.tick_ms = 1000.0 * cfg.dt

        self.tick_no = 0
        self.out_seq = 0
        self.seq_table: dict[str, int] = {}

        self.course, self.coins = cfg.build_course()
        self.profiles = {name: p.copy() for name, p in cfg.profiles.items()}
        self._default_profile = CalibrationProfile()

        self.filter = OrientationFilter(cfg.filter_alpha)
        self.raw_euler: tuple[float, float, float] | None = None  # pre-align, smoothed

        self._channels = {name: _Channel(cfg.stale_threshold)
                          for name in (_ORIENT, _FSR, _THROTTLE)}
        self._orientation = (0.0, 0.0, 0.0)
        self._fsr = (0.0, 0.0)
        self._throttle = 0.0

        self._calib_window: str | None = None  # "baseline" | "max"
        self._calib_samples: list[tuple[int, int]] = []

        self.vehicle: str | None = None
        self.vstate = VehicleState()
        self.progress = 0.0
        self.trial = TrialStatus()
        self.control = ControlInput()
        self.collisions = 0
        self.respawns = 0

        self._pending_events: list[tuple[str, dict[str, Any]]] = []
        self.last_state_payload: dict[str, Any] = {}

        if cfg.vehicle:
            self._activate_vehicle(cfg.vehicle)

    # --- helpers ---

    @property
    def profile(self) -> CalibrationProfile:
        if self.vehicle:
            return self.profiles[self.vehicle]
        return self._default_profile

    def _sim_ms(self) -> float:
        return self.tick_no * self.tick_ms

    def _next_out_seq(self) -> int:
        self.out_seq += 1
        return self.out_seq

    def _ack(self, ref_seq: int) -> wire.WireMessage:
        return wire.WireMessage("ack", SESSION_SENDER, self._next_out_seq(),
                                self._sim_ms(), {"ref_seq": ref_seq})

    def _error(self, ref_seq: int, message: str) -> wire.WireMessage:
        return wire.WireMessage("error", SESSION_SENDER, self._next_out_seq(),
                                self._sim_ms(), {"ref_seq": ref_seq, "message": message})

    def _event(self, name: str, detail: dict[str, Any]) -> None:
        self._pending_events.append((name, detail))

    def _log(self, stream: str, data: dict[str, Any], t_ms: float | None = None) -> None:
        if self.log is not None:
            self.log.append(LogRecord(tick=self.tick_no,
                                      t_ms=self.clock() if t_ms is None else t_ms,
                                      stream=stream, data=data))

    def _route_start_state(self) -> VehicleState:
        line = self.course.centerline
        x, y = line.point_at(0.0)
        return VehicleState(x=x, y=y, heading=line.tangent_at(0.0),
                            speed=0.0, tick=self.tick_no)

    def _activate_vehicle(self, vehicle: str) -> None:
        self.vehicle = vehicle
        self.vstate = self._route_start_state()
        self.progress = 0.0
        self.coins.reset()
        self.trial = TrialStatus(start_tick=self.tick_no)
        self.control = ControlInput()

    # --- ingest ---

    def inject(self, msg: wire.WireMessage,
               recv_ms: float | None = None) -> list[wire.WireMessage]:
        """Apply one decoded message; returns direct replies (ack/error).

        Must be called between ticks, from the owning loop only. Events raised
        here are buffered and broadcast with the next state message.
        """
        last = self.seq_table.get(msg.sender)
        if not wire.accept_seq(last, msg):
            self._event("stale_drop", {"sender": msg.sender, "seq": msg.seq})
            return []
        self.seq_table[msg.sender] = msg.seq

        # every accepted message is logged at the tick that will consume it
        self._log("sensor_in", wire.to_obj(msg), t_ms=recv_ms)

        handler = getattr(self, f"_on_{msg.kind}", None)
        if handler is None:
            return [self._error(msg.seq, f"kind {msg.kind!r} is outbound-only")]
        return handler(msg)

    def _mark(self, channel: str) -> None:
        self._channels[channel].updated = True

    def _on_hello(self, msg: wire.WireMessage) -> list[wire.WireMessage]:
        return [self._ack(msg.seq)]

    def _on_imu(self, msg: wire.WireMessage) -> list[wire.WireMessage]:
        p = msg.payload
        if p["mode"] == "euler":
            obs = OrientationEstimate(pitch_deg=p["pitch"], roll_deg=p["roll"],
                                      yaw_deg=p["yaw"], source="onboard")
        else:
            try:
                obs = estimate_static((p["ax"], p["ay"], p["az"]),
                                      (p["mx"], p["my"], p["mz"]))
            except DegenerateInput as exc:
                return [self._error(msg.seq, str(exc))]
        smoothed = self.filter.smooth(obs)
        self.raw_euler = (smoothed.pitch_deg, smoothed.roll_deg, smoothed.yaw_deg)
        self._orientation = align(smoothed, self.profile)
        self._mark(_ORIENT)
        return []

    def _on_fsr(self, msg: wire.WireMessage) -> list[wire.WireMessage]:
        front, rear = msg.payload["front"], msg.payload["rear"]
        if self._calib_window is not None:
            self._calib_samples.append((front, rear))
        prof = self.profile
        self._fsr = (
            normalize_fsr(front, prof.fsr_baseline_front, prof.fsr_max_front),
            normalize_fsr(rear, prof.fsr_baseline_rear, prof.fsr_max_rear),
        )
        self._mark(_FSR)
        return []

    def _on_throttle(self, msg: wire.WireMessage) -> list[wire.WireMessage]:
        prof = self.profile
        self._throttle = normalize_fsr(msg.payload["raw"],
                                       prof.throttle_min, prof.throttle_max)
        self._mark(_THROTTLE)
        return []

    def _on_set_vehicle(self, msg: wire.WireMessage) -> list[wire.WireMessage]:
        if self._calib_window is not None:
            return [self._error(msg.seq, "vehicle switch rejected during calibration")]
        vehicle = msg.payload["vehicle"]
        self._activate_vehicle(vehicle)
        self._event("calibrated", {"phase": "profile_loaded", "vehicle": vehicle})
        self._event("respawn", {"progress": 0.0, "reason": "set_vehicle"})
        return [self._ack(msg.seq)]

    def _on_calibrate(self, msg: wire.WireMessage) -> list[wire.WireMessage]:
        phase = msg.payload["phase"]
        if phase in ("fsr_baseline_begin", "fsr_max_begin"):
            if self.vehicle is None:
                return [self._error(msg.seq, "select a vehicle before calibrating")]
            if self._calib_window is not None:
                return [self._error(msg.seq, "a capture window is already open")]
            self._calib_window = "baseline" if phase.startswith("fsr_baseline") else "max"
            self._calib_samples = []
            return [self._ack(msg.seq)]

        if phase in ("fsr_baseline_end", "fsr_max_end"):
            want = "baseline" if phase.startswith("fsr_baseline") else "max"
            if self._calib_window != want:
                return [self._error(msg.seq, f"no open {want} capture window")]
            samples = self._calib_samples
            self._calib_window = None
            self._calib_samples = []
            prof = self.profile
            try:
                front, rear = capture_fsr(samples, want)
                if want == "baseline":
                    if prof.fsr_max_front <= front or prof.fsr_max_rear <= rear:
                        raise InvalidBounds("captured baseline reaches the max reference")
                    prof.fsr_baseline_front, prof.fsr_baseline_rear = front, rear
                else:
                    if front <= prof.fsr_baseline_front or rear <= prof.fsr_baseline_rear:
                        raise InvalidBounds("captured max does not exceed the baseline")
                    prof.fsr_max_front, prof.fsr_max_rear = front, rear
            except (InsufficientSamples, InvalidBounds) as exc:
                return [self._error(msg.seq, str(exc))]
            self._event("calibrated", {"phase": f"fsr_{want}", "front": front, "rear": rear})
            return [self._ack(msg.seq)]

        # imu_zero: single-shot capture of the current smoothed orientation
        if self.vehicle is None:
            return [self._error(msg.seq, "select a vehicle before calibrating")]
        if self.raw_euler is None:
            return [self._error(msg.seq, "no imu data to zero against")]
        self.profile.imu_zero = self.raw_euler
        self._event("calibrated", {"phase": "imu_zero",
                                   "pitch": self.raw_euler[0],
                                   "roll": self.raw_euler[1],
                                   "yaw": self.raw_euler[2]})
        return [self._ack(msg.seq)]

    # --- tick ---

    def _frame(self) -> SensorFrame:
        """Freshness-aware sample-and-hold view; stale channels read as zero."""
        stale = self.cfg.stale_threshold
        ch_o, ch_f, ch_t = (self._channels[_ORIENT], self._channels[_FSR],
                            self._channels[_THROTTLE])
        pitch, roll, yaw = self._orientation if ch_o.fresh < stale else (0.0, 0.0, 0.0)
        front, rear = self._fsr if ch_f.fresh < stale else (0.0, 0.0)
        throttle = self._throttle if ch_t.fresh < stale else 0.0
        return SensorFrame(pitch=pitch, roll=roll, yaw=yaw,
                           fsr_front=front, fsr_rear=rear, throttle=throttle,
                           fresh_orientation=ch_o.fresh, fresh_fsr=ch_f.fresh,
                           fresh_throttle=ch_t.fresh)

    def tick(self) -> list[wire.WireMessage]:
        """Advance one fixed step; returns the broadcast set (state + events)."""
        n = self.tick_no
        for ch in self._channels.values():
            if ch.updated:
                ch.fresh = 0
                ch.updated = False
            else:
                ch.fresh += 1

        if self.vehicle is not None:
            params = dataclasses.replace(self.cfg.mappings[self.vehicle],
                                         dead_zone=self.profile.dead_zone)
            self.control = active_controller(self.vehicle, self._frame(), params)
            self.vstate = step(self.vstate, self.control,
                               self.cfg.vehicles[self.vehicle], self.dt)

            line = self.course.centerline
            pos = (self.vstate.x, self.vstate.y)
            s_near, _ = line.nearest(pos, self.progress - 5.0, self.progress + 5.0)
            self.progress = max(self.progress, s_near)

            hit = check_collision(self.vstate, self.course)
            if hit is not None:
                self.collisions += 1
                self._event("collision", {"x": hit.x, "y": hit.y,
                                          "offset": hit.distance})
                self.vstate, self.progress = resolve_fail(self.vstate, self.course,
                                                          self.progress)
                self.respawns += 1
                self._event("respawn", {"progress": self.progress})

            if self.trial.phase == "running":
                for idx in update_pickup(self.vstate.x, self.vstate.y, self.coins):
                    self._event("coin", {"index": idx,
                                         "arc_pos": self.coins.coins[idx].arc_pos})

            if update_trial(self.trial, self.progress, self.course.total_length,
                            self.coins.collected, n) == "complete":
                self._event("trial_complete", {
                    "coins_collected": self.coins.collected,
                    "coins_total": self.coins.total,
                    "duration_ticks": n - self.trial.start_tick,
                })
        else:
            self.control = ControlInput()

        self._log("control", {"steering": self.control.steering,
                              "velocity_cmd": self.control.velocity_cmd})

        state_payload = {
            "tick": n,
            "x": self.vstate.x,
            "y": self.vstate.y,
            "heading": self.vstate.heading,
            "speed": self.vstate.speed,
            "steering_cmd": self.control.steering,
            "velocity_cmd": self.control.velocity_cmd,
            "coins_collected": self.coins.collected,
            "coins_total": self.coins.total,
        }
        self.last_state_payload = state_payload
        self._log("state", state_payload)

        t_ms = (n + 1) * self.tick_ms
        out = [wire.WireMessage("state", SESSION_SENDER, self._next_out_seq(),
                                t_ms, state_payload)]
        for name, detail in self._pending_events:
            self._log("event", {"name": name, "detail": detail})
            out.append(wire.WireMessage("event", SESSION_SENDER, self._next_out_seq(),
                                        t_ms, {"tick": n, "name": name, "detail": detail}))
        self._pending_events.clear()

        self.tick_no = n + 1
        return out

    # --- lifecycle ---

    def shutdown(self) -> None:
        """Operator stop: close the trial if still open and flush the log."""
        abort_trial(self.trial, self.tick_no)
        if self.log is not None:
            self.log.flush()

    def summary(self) -> dict[str, Any]:
        return {
            "ticks": self.tick_no,
            "vehicle": self.vehicle,
            "trial_phase": self.trial.phase,
            "completed": self.trial.phase == "complete",
            "coins_collected": self.coins.collected,
            "coins_total": self.coins.total,
            "progress": self.progress,
            "route_length": self.course.total_length,
            "collisions": self.collisions,
            "respawns": self.respawns,
        }
