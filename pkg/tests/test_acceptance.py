"""Acceptance criteria, one test per criterion, at stated tolerances.

Each test prints one ``ACCEPTANCE <n> PASS`` line on success (run with -s to
see them live); a failed assertion marks the criterion FAIL. Criterion 6
drives a real 60-second live session over loopback TCP and is the slow one;
criterion 9 reuses its log.
"""

from __future__ import annotations

import json
import math
import re
import random
import shutil
import socket
import subprocess
import sys
import threading
import time
from pathlib import Path

import pytest

from conftest import body_frame_sensors, random_message
from ridesim import wire
from ridesim.calibration import dead_zone, normalize_fsr
from ridesim.config import EngineConfig
from ridesim.dynamics import VehicleParams, VehicleState, step
from ridesim.errors import MalformedFrame, SchemaViolation, UnknownKind
from ridesim.fusion import OrientationEstimate, OrientationFilter, estimate_static, wrap_deg
from ridesim.mapping import CONTROLLERS, DEFAULT_MAPPING_PARAMS, ControlInput, SensorFrame
from ridesim.scenario import ROUTE_IDS, generate_course
from ridesim.session import Engine
from ridesim.trace import make_centerline_trace, make_offcourse_trace, run_script


def _report(n: int, text: str) -> None:
    print(f"ACCEPTANCE {n} PASS: {text}")


def test_criterion_1_protocol_round_trip():
    t0 = time.monotonic()
    rng = random.Random(20260810)
    for _ in range(10_000):
        msg = random_message(rng)
        assert wire.decode(wire.encode(msg)) == msg

    blobs = rng
    for i in range(10_000):
        n = blobs.randint(0, 120)
        if i % 3 == 0:
            blob = bytes(blobs.getrandbits(8) for _ in range(n))
        elif i % 3 == 1:
            blob = bytes(blobs.choice(b'{}[]":,abcdef0123456789 \n') for _ in range(n))
        else:
            valid = wire.encode(random_message(blobs))
            cut = blobs.randint(0, len(valid))
            blob = valid[:cut]
        try:
            wire.decode(blob)
        except (MalformedFrame, SchemaViolation, UnknownKind):
            pass  # the only allowed outcomes; anything else crashes the test
    elapsed = time.monotonic() - t0
    assert elapsed < 5.0
    _report(1, f"10k round-trips + 10k fuzz frames in {elapsed:.2f}s (< 5s)")


def test_criterion_2_calibration_math():
    t0 = time.monotonic()
    baseline, maximum = 150, 3850
    prev = -1.0
    for i in range(10_000):
        raw = 4095 * i / 9999
        v = normalize_fsr(raw, baseline, maximum)
        assert 0.0 <= v <= 1.0
        assert v >= prev
        prev = v

    t = 0.1
    for i in range(10_001):
        x = -1.0 + 2.0 * i / 10_000
        assert dead_zone(-x, t) == -dead_zone(x, t)  # odd
    eps = 1e-13
    jump = abs(dead_zone(t + eps, t) - dead_zone(t - eps, t))
    assert jump < 1e-12
    jump = abs(dead_zone(-t + eps, t) - dead_zone(-t - eps, t))
    assert jump < 1e-12
    for i in range(10_001):
        x = -1.0 + 2.0 * i / 10_000
        assert dead_zone(x, 0.0) == x  # identity at t = 0
    elapsed = time.monotonic() - t0
    assert elapsed < 1.0
    _report(2, f"normalization monotone+clamped, dead zone odd/continuous/identity "
               f"in {elapsed:.2f}s (< 1s)")


def test_criterion_3_fusion_oracle():
    t0 = time.monotonic()
    rng = random.Random(31)
    for _ in range(1000):
        pitch = rng.uniform(-85.0, 85.0)
        roll = rng.uniform(-179.0, 179.0)
        yaw = rng.uniform(-179.0, 179.0)
        accel, mag = body_frame_sensors(pitch, roll, yaw)
        est = estimate_static(accel, mag)
        assert abs(wrap_deg(est.pitch_deg - pitch)) < 1e-9
        assert abs(wrap_deg(est.roll_deg - roll)) < 1e-9
        assert abs(wrap_deg(est.yaw_deg - yaw)) < 1e-9

    f = OrientationFilter(alpha=0.5)
    f.smooth(OrientationEstimate(0.0, 0.0, 179.0))
    out = f.smooth(OrientationEstimate(0.0, 0.0, -179.0))
    assert out.yaw_deg == 180.0  # exact, blends through 180
    elapsed = time.monotonic() - t0
    assert elapsed < 1.0
    _report(3, f"1000 static poses within 1e-9 deg, EMA wraparound exact "
               f"in {elapsed:.2f}s (< 1s)")


def test_criterion_4_mapping_conformance():
    t0 = time.monotonic()
    rng = random.Random(44)
    sources = {"escooter": ("yaw", "throttle"), "segway": ("roll", "fsr"),
               "unicycle": ("yaw", "pitch"), "skateboard": ("roll", "pitch")}

    def rand_frame():
        return SensorFrame(pitch=rng.uniform(-180, 180), roll=rng.uniform(-180, 180),
                           yaw=rng.uniform(-180, 180), fsr_front=rng.random(),
                           fsr_rear=rng.random(), throttle=rng.random())

    def sgn(v):
        return (v > 0) - (v < 0)

    for name, fn in CONTROLLERS.items():
        p = DEFAULT_MAPPING_PARAMS[name]
        steer_src, vel_src = sources[name]
        for _ in range(2000):
            f = rand_frame()
            out = fn(f, p)
            # range safety
            assert -1.0 <= out.steering <= 1.0
            assert -1.0 <= out.velocity_cmd <= 1.0
            # sign convention on the steering source angle
            angle = getattr(f, steer_src)
            assert out.steering == 0.0 or sgn(out.steering) == sgn(angle)
            if vel_src == "pitch":
                assert out.velocity_cmd == 0.0 or sgn(out.velocity_cmd) == sgn(f.pitch)
            elif vel_src == "fsr":
                assert (out.velocity_cmd == 0.0
                        or sgn(out.velocity_cmd) == sgn(f.fsr_front - f.fsr_rear))
            else:
                assert out.velocity_cmd >= 0.0
            # channel isolation: unnamed channels never change the output
            if name == "escooter":
                g = SensorFrame(pitch=rng.uniform(-180, 180), roll=rng.uniform(-180, 180),
                                yaw=f.yaw, fsr_front=rng.random(), fsr_rear=rng.random(),
                                throttle=f.throttle)
            elif name == "segway":
                g = SensorFrame(pitch=rng.uniform(-180, 180), roll=f.roll,
                                yaw=rng.uniform(-180, 180), fsr_front=f.fsr_front,
                                fsr_rear=f.fsr_rear, throttle=rng.random())
            elif name == "unicycle":
                g = SensorFrame(pitch=f.pitch, roll=rng.uniform(-180, 180), yaw=f.yaw,
                                fsr_front=rng.random(), fsr_rear=rng.random(),
                                throttle=rng.random())
            else:
                g = SensorFrame(pitch=f.pitch, roll=f.roll, yaw=rng.uniform(-180, 180),
                                fsr_front=rng.random(), fsr_rear=rng.random(),
                                throttle=rng.random())
            assert fn(g, p) == out

        # monotonicity along each source channel
        for field, key in (("steering", steer_src), ("velocity_cmd", vel_src)):
            if key in ("throttle", "fsr"):
                samples = [SensorFrame(throttle=i / 200.0) if key == "throttle" else
                           SensorFrame(fsr_front=i / 200.0, fsr_rear=0.5)
                           for i in range(201)]
            else:
                full = getattr(p, f"{key}_full_scale")
                samples = [SensorFrame(**{key: -full + 2 * full * i / 200})
                           for i in range(201)]
            prev = None
            for f in samples:
                val = getattr(fn(f, p), field)
                if prev is not None:
                    assert val >= prev - 1e-15
                prev = val
    elapsed = time.monotonic() - t0
    assert elapsed < 5.0
    _report(4, f"4 vehicles x 2000 frames: range, isolation, signs, monotone "
               f"in {elapsed:.2f}s (< 5s)")


def test_criterion_5_circle_law():
    t0 = time.monotonic()
    p = VehicleParams(v_max=6.0, a_accel=2.0, a_decel=3.0, omega_max=1.2)
    dt = 0.001
    steering, speed = 0.5, 3.0
    radius = speed / (steering * p.omega_max)
    assert radius == 5.0
    s = VehicleState(heading=0.0, speed=speed)
    cx = s.x - radius * math.sin(s.heading)
    cy = s.y + radius * math.cos(s.heading)
    c = ControlInput(steering, speed / p.v_max)
    ticks = int(2.0 * math.pi / (steering * p.omega_max * dt)) + 1
    worst = 0.0
    for _ in range(ticks):
        s = step(s, c, p, dt)
        worst = max(worst, abs(math.hypot(s.x - cx, s.y - cy) - radius) / radius)
    assert worst < 0.005
    elapsed = time.monotonic() - t0
    assert elapsed < 1.0
    _report(5, f"radius 5.000 m held to {worst * 100:.4f}% (< 0.5%) over one "
               f"revolution in {elapsed:.2f}s (< 1s)")


# --- criteria 6 and 9 share one real 60 s live run over loopback ---

@pytest.fixture(scope="module")
def live_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("live")
    log_path = tmp / "live.jsonl"
    t0 = time.monotonic()
    proc = subprocess.Popen(
        [sys.executable, "-m", "ridesim", "run", "--vehicle", "escooter",
         "--route", "1", "--listen", "127.0.0.1:0", "--log", str(log_path),
         "--max-ticks", "6000"],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    try:
        line = proc.stdout.readline()
        port = int(json.loads(line)["listening"].rsplit(":", 1)[1])

        stop = threading.Event()

        def client():
            sock = socket.create_connection(("127.0.0.1", port), timeout=5.0)
            sock.settimeout(0.5)

            def drain():
                try:
                    while not stop.is_set():
                        if not sock.recv(65536):
                            return
                except OSError:
                    return

            threading.Thread(target=drain, daemon=True).start()
            seq = 0
            t_start = time.monotonic()
            try:
                while not stop.is_set():
                    t = time.monotonic() - t_start
                    yaw = 6.0 * math.sin(2.0 * math.pi * 0.1 * t)
                    seq += 1
                    sock.sendall(wire.encode(wire.imu_euler(
                        "imu", seq, t * 1000.0, 0.0, 0.0, yaw)))
                    seq += 1
                    sock.sendall(wire.encode(wire.throttle(
                        "imu", seq, t * 1000.0, 2600)))
                    time.sleep(0.02)  # 50 Hz sender
            except OSError:
                pass

        worker = threading.Thread(target=client, daemon=True)
        worker.start()
        proc.wait(timeout=85)
        stop.set()
        worker.join(timeout=5)
    finally:
        if proc.poll() is None:
            proc.kill()
    assert proc.returncode == 0
    wall = time.monotonic() - t0
    return {"log": log_path, "wall": wall, "tmp": tmp}


def test_criterion_6_replay_determinism(live_run):
    t0 = time.monotonic()
    log_path = live_run["log"]

    verify = subprocess.run(
        [sys.executable, "-m", "ridesim", "replay", str(log_path), "--verify"],
        capture_output=True, text=True, timeout=120)
    assert verify.returncode == 0, verify.stderr
    verdict = json.loads(verify.stdout.strip().splitlines()[-1])
    assert verdict["verdict"] == "identical"
    assert verdict["ticks"] == 6000

    # single-byte tamper: flip one digit inside a mid-run state record
    tampered = live_run["tmp"] / "tampered.jsonl"
    shutil.copy(log_path, tampered)
    lines = tampered.read_text().splitlines()
    target = None
    for i, line in enumerate(lines):
        if '"stream":"state"' in line and '"tick":3000,' in line:
            target = i
            break
    assert target is not None
    m = re.search(r'"x":-?\d+\.(\d+)', lines[target])
    assert m is not None
    pos = m.end(1) - 1
    old = lines[target][pos]
    new = "1" if old != "1" else "2"
    lines[target] = lines[target][:pos] + new + lines[target][pos + 1:]
    tampered.write_text("\n".join(lines) + "\n")

    bad = subprocess.run(
        [sys.executable, "-m", "ridesim", "replay", str(tampered), "--verify"],
        capture_output=True, text=True, timeout=120)
    assert bad.returncode == 1
    bad_verdict = json.loads(bad.stdout.strip().splitlines()[-1])
    assert bad_verdict["verdict"] == "divergent"
    assert bad_verdict["divergence_tick"] == 3000

    total = live_run["wall"] + (time.monotonic() - t0)
    assert total < 90.0
    _report(6, f"60 s live run replays bitwise identical; tampered byte detected "
               f"at tick 3000; total {total:.1f}s (< 90s)")


def test_criterion_7_end_to_end_task():
    t0 = time.monotonic()
    vehicles = ("escooter", "segway", "unicycle", "skateboard")
    lengths = []
    for route, vehicle in zip(ROUTE_IDS, vehicles):
        cfg = EngineConfig(vehicle=vehicle, route=route)
        pairs = make_centerline_trace(cfg, vehicle)
        summary = run_script(cfg, pairs)
        assert summary["completed"], (route, vehicle, summary)
        assert summary["coins_collected"] == summary["coins_total"], (route, vehicle)
        lengths.append(summary["route_length"])

    for a in lengths:
        for b in lengths:
            assert abs(a - b) / b < 0.01  # total_length within 1%
    for route in ROUTE_IDS:
        _, coins = generate_course(route)
        gaps = [b.arc_pos - a.arc_pos
                for a, b in zip(coins.coins, coins.coins[1:])]
        assert all(abs(g - coins.spacing) < 1e-6 for g in gaps)

    cfg = EngineConfig(vehicle="escooter", route=1)
    off = run_script(cfg, make_offcourse_trace(cfg), max_ticks=2000)
    assert off["collisions"] >= 1 and off["respawns"] >= 1
    assert off["ticks"] <= 2000  # run terminates
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0
    _report(7, f"4 routes completed with 100% coins; off-corridor trace hit "
               f"{off['collisions']} collisions and terminated; {elapsed:.1f}s (< 60s)")


def test_criterion_8_fail_safety():
    cfg = EngineConfig(vehicle="escooter",
                       course_points=[[0.0, 0.0], [2000.0, 0.0]])
    engine = Engine(cfg, log=None, clock=lambda: 0.0)
    silence_at = 500
    for t in range(silence_at):
        engine.inject(wire.imu_euler("imu", 2 * t + 1, 0, 0.0, 0.0, 0.0))
        engine.inject(wire.throttle("imu", 2 * t + 2, 0, 4095))
        engine.tick()
    p = cfg.vehicles["escooter"]
    assert engine.vstate.speed == p.v_max

    zero_tick = None
    for t in range(silence_at, silence_at + 1000):
        engine.tick()
        if engine.vstate.speed == 0.0:
            zero_tick = t
            break
    assert zero_tick is not None
    bound_s = cfg.stale_threshold / cfg.tick_rate + p.v_max / p.a_decel
    elapsed_sim = (zero_tick - (silence_at - 1)) * engine.dt
    assert engine.vstate.speed == 0.0  # exactly zero, not merely small
    assert elapsed_sim <= bound_s + 1e-9
    _report(8, f"speed exactly 0.0 after {elapsed_sim:.2f}s of simulated time "
               f"(bound {bound_s:.2f}s)")


def test_criterion_9_latency_report(live_run):
    from ridesim.report import latency_report

    out_dir = live_run["tmp"] / "reports"
    summary = latency_report(live_run["log"], out_dir)
    assert Path(summary["figure"]).exists()
    assert Path(summary["csv"]).exists()
    assert summary["ticks_with_input"] > 1000
    assert summary["median_ms"] < summary["tick_interval_ms"]
    _report(9, f"median ingest-to-state latency {summary['median_ms']:.2f} ms "
               f"< tick interval {summary['tick_interval_ms']:.1f} ms; "
               f"histogram at {summary['figure']}")
