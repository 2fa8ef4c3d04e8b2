/**
 * Client side of the session wire schema: one flat JSON object per frame.
 *
 * Field names and ranges are contractual with the engine; builders emit keys
 * in canonical order and parseFrame validates everything the console consumes.
 */

export const VEHICLES = ["escooter", "segway", "unicycle", "skateboard"] as const;
export type Vehicle = (typeof VEHICLES)[number];

export const CALIBRATE_PHASES = [
  "fsr_baseline_begin",
  "fsr_baseline_end",
  "fsr_max_begin",
  "fsr_max_end",
  "imu_zero",
] as const;
export type CalibratePhase = (typeof CALIBRATE_PHASES)[number];

export const EVENT_NAMES = [
  "coin", "collision", "respawn", "trial_complete", "stale_drop", "calibrated",
] as const;
export type EventName = (typeof EVENT_NAMES)[number];

export const ADC_MAX = 4095;

export interface CommonFields {
  kind: string;
  sender: string;
  seq: number;
  t_ms: number;
}

export interface StateMsg extends CommonFields {
  kind: "state";
  tick: number;
  x: number;
  y: number;
  heading: number;
  speed: number;
  steering_cmd: number;
  velocity_cmd: number;
  coins_collected: number;
  coins_total: number;
}

export interface EventMsg extends CommonFields {
  kind: "event";
  tick: number;
  name: EventName;
  detail: Record<string, unknown>;
}

export interface AckMsg extends CommonFields {
  kind: "ack";
  ref_seq: number;
}

export interface ErrorMsg extends CommonFields {
  kind: "error";
  ref_seq: number;
  message: string;
}

export type SessionMsg = StateMsg | EventMsg | AckMsg | ErrorMsg;

export type OutboundFrame = Record<string, unknown>;

export function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}

export function toAdc(normalized: number): number {
  return Math.round(clamp(normalized, 0, 1) * ADC_MAX);
}

function common(kind: string, sender: string, seq: number, tMs: number) {
  return { kind, sender, seq, t_ms: tMs };
}

export function helloMsg(sender: string, seq: number, tMs: number): OutboundFrame {
  return common("hello", sender, seq, tMs);
}

export function imuEulerMsg(sender: string, seq: number, tMs: number,
                            pitch: number, roll: number, yaw: number): OutboundFrame {
  return {
    ...common("imu", sender, seq, tMs),
    mode: "euler",
    pitch: clamp(pitch, -180, 180),
    roll: clamp(roll, -180, 180),
    yaw: clamp(yaw, -180, 180),
  };
}

export function fsrMsg(sender: string, seq: number, tMs: number,
                       front: number, rear: number): OutboundFrame {
  return { ...common("fsr", sender, seq, tMs), front, rear };
}

export function throttleMsg(sender: string, seq: number, tMs: number,
                            raw: number): OutboundFrame {
  return { ...common("throttle", sender, seq, tMs), raw };
}

export function setVehicleMsg(sender: string, seq: number, tMs: number,
                              vehicle: Vehicle): OutboundFrame {
  return { ...common("set_vehicle", sender, seq, tMs), vehicle };
}

export function calibrateMsg(sender: string, seq: number, tMs: number,
                             phase: CalibratePhase): OutboundFrame {
  return { ...common("calibrate", sender, seq, tMs), phase };
}

export function encodeFrame(msg: OutboundFrame): string {
  return JSON.stringify(msg);
}

function need(obj: Record<string, unknown>, field: string, type: string): void {
  if (!(field in obj) || typeof obj[field] !== type) {
    throw new Error(`bad frame: field ${field} must be ${type}`);
  }
}

/** Parse one inbound frame (trailing newline tolerated); throws on garbage. */
export function parseFrame(text: string): SessionMsg {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    throw new Error("bad frame: not JSON");
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new Error("bad frame: not an object");
  }
  const rec = obj as Record<string, unknown>;
  need(rec, "kind", "string");
  need(rec, "sender", "string");
  need(rec, "seq", "number");
  need(rec, "t_ms", "number");
  switch (rec.kind) {
    case "state":
      for (const f of ["tick", "x", "y", "heading", "speed", "steering_cmd",
                       "velocity_cmd", "coins_collected", "coins_total"]) {
        need(rec, f, "number");
      }
      return rec as unknown as StateMsg;
    case "event": {
      need(rec, "tick", "number");
      need(rec, "name", "string");
      if (!(EVENT_NAMES as readonly string[]).includes(rec.name as string)) {
        throw new Error(`bad frame: unknown event name ${rec.name}`);
      }
      if (typeof rec.detail !== "object" || rec.detail === null) {
        throw new Error("bad frame: event detail must be an object");
      }
      return rec as unknown as EventMsg;
    }
    case "ack":
      need(rec, "ref_seq", "number");
      return rec as unknown as AckMsg;
    case "error":
      need(rec, "ref_seq", "number");
      need(rec, "message", "string");
      return rec as unknown as ErrorMsg;
    default:
      throw new Error(`bad frame: unexpected kind ${rec.kind}`);
  }
}
