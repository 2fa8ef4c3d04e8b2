"""Calibration math: capture means, normalization, dead zone, axis alignment."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ridesim.calibration import (CalibrationProfile, align, axis_map_from_json,
                                 capture_fsr, dead_zone, load_profiles,
                                 normalize_fsr, profile_from_dict,
                                 profile_to_dict, save_profiles)
from ridesim.errors import ConfigError, InsufficientSamples, InvalidBounds
from ridesim.fusion import OrientationEstimate


class TestCaptureFsr:
    def test_constant_samples(self):
        assert capture_fsr([(100, 120)] * 10, "baseline") == (100, 120)

    def test_mean_arithmetic(self):
        samples = [(3000, 3000), (3100, 3100)] * 5
        front = round(sum(s[0] for s in samples) / len(samples))  # oracle
        assert capture_fsr(samples, "max") == (front, front)
        assert front == 3050

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientSamples):
            capture_fsr([(1, 1)] * 3, "baseline")

    def test_bad_phase(self):
        with pytest.raises(ValueError):
            capture_fsr([(1, 1)] * 10, "warmup")


class TestNormalize:
    def test_baseline_maps_to_zero(self):
        assert normalize_fsr(100, 100, 1100) == 0.0

    def test_max_maps_to_one(self):
        assert normalize_fsr(1100, 100, 1100) == 1.0

    def test_midpoint(self):
        assert normalize_fsr(600, 100, 1100) == pytest.approx(0.5, abs=1e-15)

    def test_clamps_outside_bounds(self):
        assert normalize_fsr(50, 100, 1100) == 0.0
        assert normalize_fsr(4000, 100, 1100) == 1.0

    def test_invalid_bounds(self):
        with pytest.raises(InvalidBounds):
            normalize_fsr(0, 500, 500)

    @given(st.integers(0, 4095))
    @settings(max_examples=200, deadline=None)
    def test_in_unit_interval(self, raw):
        v = normalize_fsr(raw, 100, 1100)
        assert 0.0 <= v <= 1.0

    def test_monotone_over_sweep(self):
        prev = -1.0
        for raw in range(0, 4096, 3):
            v = normalize_fsr(raw, 700, 2900)
            assert v >= prev
            prev = v


class TestDeadZone:
    def test_inside_zone(self):
        assert dead_zone(0.05, 0.10) == 0.0

    def test_full_deflection_preserved(self):
        assert dead_zone(1.0, 0.10) == 1.0
        assert dead_zone(-1.0, 0.10) == -1.0

    def test_ramp_arithmetic(self):
        assert dead_zone(0.55, 0.10) == pytest.approx(0.5, abs=1e-12)
        assert dead_zone(-0.55, 0.10) == pytest.approx(-0.5, abs=1e-12)

    def test_identity_at_zero_threshold(self):
        for x in (-1.0, -0.3, 0.0, 0.7, 1.0):
            assert dead_zone(x, 0.0) == x

    def test_zero_exactly_on_band(self):
        t = 0.2
        assert dead_zone(t, t) == 0.0
        assert dead_zone(-t, t) == 0.0
        assert dead_zone(math.nextafter(t, 1.0), t) > 0.0

    @given(st.floats(-1.0, 1.0, allow_nan=False),
           st.floats(0.0, 0.49, allow_nan=False))
    @settings(max_examples=300, deadline=None)
    def test_odd_and_bounded(self, x, t):
        assert dead_zone(-x, t) == -dead_zone(x, t)
        assert abs(dead_zone(x, t)) <= 1.0

    def test_continuity_at_threshold(self):
        t = 0.1
        eps = 1e-13
        jump = abs(dead_zone(t + eps, t) - dead_zone(t - eps, t))
        assert jump < 1e-12

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            dead_zone(0.5, 0.5)
        with pytest.raises(ValueError):
            dead_zone(0.5, -0.1)


class TestAlign:
    def test_identity_profile(self):
        prof = CalibrationProfile()
        est = OrientationEstimate(5.0, -3.0, 42.0)
        assert align(est, prof) == (5.0, -3.0, 42.0)

    def test_zero_offset_subtraction(self):
        prof = CalibrationProfile(imu_zero=(0.0, 0.0, 10.0))
        est = OrientationEstimate(0.0, 0.0, 25.0)
        assert align(est, prof)[2] == pytest.approx(15.0, abs=1e-12)

    def test_signed_permutation(self):
        # pitch reads the negated roll sensor, roll reads the pitch sensor
        prof = CalibrationProfile(axis_map=axis_map_from_json(
            {"pitch": "-roll", "roll": "pitch", "yaw": "yaw"}))
        est = OrientationEstimate(5.0, 2.0, 0.0)
        aligned = align(est, prof)
        assert aligned == (-2.0, 5.0, 0.0)

    def test_invertible(self):
        prof = CalibrationProfile(
            imu_zero=(1.0, -2.0, 3.0),
            axis_map=axis_map_from_json({"pitch": "yaw", "roll": "-pitch",
                                         "yaw": "-roll"}))
        est = OrientationEstimate(7.0, 11.0, -20.0)
        p, r, y = align(est, prof)
        # independent inverse: undo permutation, then re-add offsets
        inverse = {}
        for out_axis, (src, sign) in prof.axis_map.items():
            inverse[src] = {"pitch": p, "roll": r, "yaw": y}[out_axis] * sign
        recovered = (inverse["pitch"] + prof.imu_zero[0],
                     inverse["roll"] + prof.imu_zero[1],
                     inverse["yaw"] + prof.imu_zero[2])
        assert recovered == pytest.approx((7.0, 11.0, -20.0), abs=1e-12)

    def test_yaw_renormalized(self):
        prof = CalibrationProfile(imu_zero=(0.0, 0.0, -10.0))
        est = OrientationEstimate(0.0, 0.0, 175.0)
        assert align(est, prof)[2] == pytest.approx(-175.0, abs=1e-12)


class TestProfileSerialization:
    def test_round_trip(self):
        prof = CalibrationProfile(
            fsr_baseline_front=80, fsr_baseline_rear=90,
            fsr_max_front=3000, fsr_max_rear=3100,
            throttle_min=10, throttle_max=4000,
            imu_zero=(1.0, 2.0, 3.0),
            axis_map=axis_map_from_json({"pitch": "-yaw", "roll": "roll",
                                         "yaw": "pitch"}),
            dead_zone=0.15)
        assert profile_from_dict(profile_to_dict(prof)) == prof

    def test_rejects_unknown_fields(self):
        with pytest.raises(ConfigError):
            profile_from_dict({"fsr_baseline_font": 1})

    def test_rejects_bad_axis_map(self):
        with pytest.raises(ConfigError):
            axis_map_from_json({"pitch": "roll", "roll": "roll", "yaw": "yaw"})
        with pytest.raises(ConfigError):
            axis_map_from_json({"pitch": "up", "roll": "roll", "yaw": "yaw"})

    def test_validation_rejects_degenerate_bounds(self):
        with pytest.raises(InvalidBounds):
            profile_from_dict({"fsr_baseline_front": 4095, "fsr_max_front": 10})

    def test_per_vehicle_file_round_trip(self, tmp_path):
        profiles = {v: CalibrationProfile() for v in
                    ("escooter", "segway", "unicycle", "skateboard")}
        profiles["segway"].fsr_baseline_front = 120
        path = tmp_path / "rider.json"
        save_profiles(profiles, path)
        loaded = load_profiles(path)
        assert loaded == profiles

    def test_default_section_fills_missing_vehicles(self, tmp_path):
        path = tmp_path / "rider.json"
        path.write_text('{"default": {"dead_zone": 0.2}}')
        loaded = load_profiles(path)
        assert all(p.dead_zone == 0.2 for p in loaded.values())
