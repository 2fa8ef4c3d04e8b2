/**
 * Latest-wins state buffer and the event/toast model.
 *
 * The session streams state at tick rate; rendering coalesces to display
 * refresh by keeping only the newest state (bounded, no queue growth).
 * Events become short-lived toasts plus per-coin collected flags.
 */

import { EventMsg, StateMsg } from "./protocol.js";

export class StateBuffer {
  private latestState: StateMsg | null = null;
  private lastUpdateMs = -Infinity;
  /** diagnostic: how many states arrived since the renderer last took one */
  pendingCount = 0;

  push(state: StateMsg, nowMs: number): void {
    this.latestState = state; // latest-wins: older frames are dropped
    this.lastUpdateMs = nowMs;
    this.pendingCount = Math.min(this.pendingCount + 1, 1);
  }

  latest(): StateMsg | null {
    this.pendingCount = 0;
    return this.latestState;
  }

  /** True when no state arrived within windowMs. */
  stale(nowMs: number, windowMs = 500): boolean {
    return nowMs - this.lastUpdateMs > windowMs;
  }
}

export interface Toast {
  text: string;
  bornMs: number;
}

const TOAST_TTL_MS = 2500;
const TOAST_CAP = 5;

function toastText(ev: EventMsg): string | null {
  switch (ev.name) {
    case "coin": {
      const idx = ev.detail["index"];
      return `coin ${typeof idx === "number" ? idx + 1 : "?"} collected`;
    }
    case "collision":
      return "collision!";
    case "respawn":
      return "respawned on route";
    case "trial_complete":
      return "trial complete";
    case "calibrated":
      return `calibrated: ${ev.detail["phase"] ?? ""}`;
    case "stale_drop":
      return null; // transport noise, not rider-facing
  }
}

export class EventFeed {
  private toasts: Toast[] = [];
  readonly collectedCoins = new Set<number>();

  push(ev: EventMsg, nowMs: number): void {
    if (ev.name === "coin" && typeof ev.detail["index"] === "number") {
      this.collectedCoins.add(ev.detail["index"] as number);
    }
    // a vehicle switch resets the coin set; collision respawns keep it
    if (ev.name === "respawn" && ev.detail["reason"] === "set_vehicle") {
      this.collectedCoins.clear();
    }
    const text = toastText(ev);
    if (text !== null) {
      this.toasts.push({ text, bornMs: nowMs });
      if (this.toasts.length > TOAST_CAP) {
        this.toasts.splice(0, this.toasts.length - TOAST_CAP);
      }
    }
  }

  active(nowMs: number): Toast[] {
    this.toasts = this.toasts.filter((t) => nowMs - t.bornMs < TOAST_TTL_MS);
    return this.toasts;
  }
}
