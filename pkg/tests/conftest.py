"""Shared test helpers: valid-message generators and small math oracles."""

from __future__ import annotations

import math
import random

from hypothesis import strategies as st

from ridesim.wire import (ADC_MAX, CALIBRATE_PHASES, EVENT_NAMES, SEQ_MAX,
                          VEHICLES, WireMessage)

# --- hypothesis strategies for schema-valid messages ---

senders = st.text(min_size=1, max_size=64)
seqs = st.integers(0, SEQ_MAX)
t_ms_values = st.one_of(
    st.integers(0, 2**50),
    st.floats(min_value=0.0, max_value=1e12, allow_nan=False, allow_infinity=False),
)
angles = st.floats(min_value=-180.0, max_value=180.0,
                   allow_nan=False, allow_infinity=False)
finite = st.floats(allow_nan=False, allow_infinity=False)
adc = st.integers(0, ADC_MAX)
unit_cmd = st.floats(min_value=-1.0, max_value=1.0,
                     allow_nan=False, allow_infinity=False)

_json_scalars = st.one_of(st.none(), st.booleans(), st.integers(-2**40, 2**40),
                          finite, st.text(max_size=20))
details = st.dictionaries(st.text(max_size=10), _json_scalars, max_size=4)


@st.composite
def payloads(draw, kind: str) -> dict:
    if kind == "hello":
        return {}
    if kind == "imu":
        if draw(st.booleans()):
            return {"mode": "euler", "pitch": draw(angles), "roll": draw(angles),
                    "yaw": draw(angles)}
        return {"mode": "raw", **{k: draw(finite) for k in
                                  ("ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz")}}
    if kind == "fsr":
        return {"front": draw(adc), "rear": draw(adc)}
    if kind == "throttle":
        return {"raw": draw(adc)}
    if kind == "set_vehicle":
        return {"vehicle": draw(st.sampled_from(VEHICLES))}
    if kind == "calibrate":
        return {"phase": draw(st.sampled_from(CALIBRATE_PHASES))}
    if kind == "state":
        total = draw(st.integers(0, 50))
        return {"tick": draw(st.integers(0, 2**40)), "x": draw(finite),
                "y": draw(finite), "heading": draw(finite), "speed": draw(finite),
                "steering_cmd": draw(unit_cmd), "velocity_cmd": draw(unit_cmd),
                "coins_collected": draw(st.integers(0, total)), "coins_total": total}
    if kind == "event":
        return {"tick": draw(st.integers(0, 2**40)),
                "name": draw(st.sampled_from(EVENT_NAMES)), "detail": draw(details)}
    if kind == "ack":
        return {"ref_seq": draw(seqs)}
    if kind == "error":
        return {"ref_seq": draw(seqs), "message": draw(st.text(max_size=40))}
    raise AssertionError(kind)


@st.composite
def messages(draw, kinds: tuple[str, ...] | None = None) -> WireMessage:
    kind = draw(st.sampled_from(kinds or ("hello", "imu", "fsr", "throttle",
                                          "set_vehicle", "calibrate", "state",
                                          "event", "ack", "error")))
    return WireMessage(kind=kind, sender=draw(senders), seq=draw(seqs),
                       t_ms=draw(t_ms_values), payload=draw(payloads(kind)))


# --- seeded bulk generator (acceptance runtime bounds need plain loops) ---

def random_message(rng: random.Random) -> WireMessage:
    kind = rng.choice(("hello", "imu", "fsr", "throttle", "set_vehicle",
                       "calibrate", "state", "event", "ack", "error"))
    sender = "".join(rng.choice("abcdefgh0123456789_") for _ in range(rng.randint(1, 12)))
    seq = rng.randrange(0, SEQ_MAX)
    t_ms = rng.choice((rng.randrange(0, 2**48), rng.random() * 1e9))

    def angle():
        return rng.uniform(-180.0, 180.0)

    def num():
        return rng.uniform(-1e6, 1e6)

    if kind == "hello":
        payload = {}
    elif kind == "imu":
        if rng.random() < 0.5:
            payload = {"mode": "euler", "pitch": angle(), "roll": angle(), "yaw": angle()}
        else:
            payload = {"mode": "raw", **{k: num() for k in
                                         ("ax", "ay", "az", "gx", "gy", "gz",
                                          "mx", "my", "mz")}}
    elif kind == "fsr":
        payload = {"front": rng.randint(0, ADC_MAX), "rear": rng.randint(0, ADC_MAX)}
    elif kind == "throttle":
        payload = {"raw": rng.randint(0, ADC_MAX)}
    elif kind == "set_vehicle":
        payload = {"vehicle": rng.choice(VEHICLES)}
    elif kind == "calibrate":
        payload = {"phase": rng.choice(CALIBRATE_PHASES)}
    elif kind == "state":
        total = rng.randint(0, 40)
        payload = {"tick": rng.randrange(0, 2**40), "x": num(), "y": num(),
                   "heading": rng.uniform(-math.pi, math.pi), "speed": num(),
                   "steering_cmd": rng.uniform(-1, 1), "velocity_cmd": rng.uniform(-1, 1),
                   "coins_collected": rng.randint(0, total), "coins_total": total}
    elif kind == "event":
        payload = {"tick": rng.randrange(0, 2**40), "name": rng.choice(EVENT_NAMES),
                   "detail": {"k": rng.random(), "n": rng.randint(0, 99)}}
    elif kind == "ack":
        payload = {"ref_seq": rng.randrange(0, SEQ_MAX)}
    else:
        payload = {"ref_seq": rng.randrange(0, SEQ_MAX), "message": "x" * rng.randint(0, 20)}
    return WireMessage(kind=kind, sender=sender, seq=seq, t_ms=t_ms, payload=payload)


# --- independent rotation oracle for fusion tests ---

def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]


def rot_y(a):
    c, s = math.cos(a), math.sin(a)
    return [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]


def rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)]
            for i in range(3)]


def mat_t_vec(m, v):
    """Transpose(m) @ v: rotate a world vector into the body frame."""
    return tuple(m[0][j] * v[0] + m[1][j] * v[1] + m[2][j] * v[2] for j in range(3))


def body_frame_sensors(pitch_deg: float, roll_deg: float, yaw_deg: float,
                       g: float = 9.80665):
    """Accel/mag a static IMU at this attitude would measure."""
    r = matmul(matmul(rot_z(math.radians(yaw_deg)), rot_y(math.radians(pitch_deg))),
               rot_x(math.radians(roll_deg)))
    accel = mat_t_vec(r, (0.0, 0.0, g))
    mag = mat_t_vec(r, (1.0, 0.0, 0.0))
    return accel, mag
