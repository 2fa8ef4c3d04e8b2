/**
 * Virtual rigs: the desk-scale stand-in for each vehicle's physical inputs.
 *
 * Held keys slew the simulated body angles (or throttle/pressure) toward a
 * preset target; releasing decays back to neutral, like easing off a lean.
 * Each preset emits only the sensor kinds its vehicle actually reads:
 * escooter imu+throttle, segway imu+fsr, unicycle/skateboard imu only.
 */

import {
  OutboundFrame, Vehicle, fsrMsg, imuEulerMsg, throttleMsg, toAdc,
} from "./protocol.js";

export type Control = "left" | "right" | "fwd" | "back";

interface Preset {
  /** degrees the steering axis leans toward while held */
  steerTarget: number;
  /** deg/s slew for the steering axis */
  steerSlew: number;
  /** steering axis name on the wire */
  steerAxis: "yaw" | "roll";
  /** drive channel: throttle [0,1], pressure diff [-1,1], or pitch degrees */
  drive: "throttle" | "pressure" | "pitch";
  driveTarget: number;
  driveSlew: number;
}

export const PRESETS: Record<Vehicle, Preset> = {
  escooter: { steerAxis: "yaw", steerTarget: 35, steerSlew: 70,
              drive: "throttle", driveTarget: 1.0, driveSlew: 1.2 },
  segway: { steerAxis: "roll", steerTarget: 16, steerSlew: 45,
            drive: "pressure", driveTarget: 0.9, driveSlew: 1.6 },
  unicycle: { steerAxis: "yaw", steerTarget: 24, steerSlew: 55,
              drive: "pitch", driveTarget: 12, driveSlew: 28 },
  skateboard: { steerAxis: "roll", steerTarget: 12, steerSlew: 40,
                drive: "pitch", driveTarget: 12, driveSlew: 28 },
};

export function channelsFor(vehicle: Vehicle): string[] {
  switch (vehicle) {
    case "escooter":
      return ["imu", "throttle"];
    case "segway":
      return ["imu", "fsr"];
    default:
      return ["imu"];
  }
}

function slew(value: number, target: number, rate: number, dtS: number): number {
  if (value < target) return Math.min(value + rate * dtS, target);
  if (value > target) return Math.max(value - rate * dtS, target);
  return value;
}

export class VirtualRig {
  vehicle: Vehicle;
  private held = new Set<Control>();
  /** simulated sensor state */
  steer = 0;      // degrees on the preset's steering axis
  drive = 0;      // throttle [0,1] | pressure diff [-1,1] | pitch degrees

  constructor(vehicle: Vehicle) {
    this.vehicle = vehicle;
  }

  setVehicle(vehicle: Vehicle): void {
    this.vehicle = vehicle;
    this.neutral();
  }

  neutral(): void {
    this.held.clear();
    this.steer = 0;
    this.drive = 0;
  }

  press(control: Control): void {
    this.held.add(control);
  }

  release(control: Control): void {
    this.held.delete(control);
  }

  /** Advance the body model by dtMs. */
  step(dtMs: number): void {
    const p = PRESETS[this.vehicle];
    const dtS = dtMs / 1000;
    const steerTarget = this.held.has("left") ? p.steerTarget
      : this.held.has("right") ? -p.steerTarget : 0;
    this.steer = slew(this.steer, steerTarget, p.steerSlew, dtS);

    let driveTarget = 0;
    if (this.held.has("fwd")) driveTarget = p.driveTarget;
    else if (this.held.has("back") && p.drive !== "throttle") driveTarget = -p.driveTarget;
    this.drive = slew(this.drive, driveTarget, p.driveSlew, dtS);
  }

  /** Wire frames for the current body state; only this preset's channels. */
  messages(sender: string, nextSeq: () => number, tMs: number): OutboundFrame[] {
    const p = PRESETS[this.vehicle];
    const pitch = p.drive === "pitch" ? this.drive : 0;
    const roll = p.steerAxis === "roll" ? this.steer : 0;
    const yaw = p.steerAxis === "yaw" ? this.steer : 0;
    const out: OutboundFrame[] = [
      imuEulerMsg(sender, nextSeq(), tMs, pitch, roll, yaw),
    ];
    if (p.drive === "throttle") {
      out.push(throttleMsg(sender, nextSeq(), tMs, toAdc(this.drive)));
    } else if (p.drive === "pressure") {
      out.push(fsrMsg(sender, nextSeq(), tMs,
                      toAdc(0.5 + this.drive / 2), toAdc(0.5 - this.drive / 2)));
    }
    return out;
  }
}
