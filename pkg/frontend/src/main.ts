/**
 * Console entry point: wires keyboard -> rig -> link, state stream -> canvas.
 *
 * URL parameters: ?ws=ws://127.0.0.1:8098 selects the session endpoint,
 * ?course=course.json a course file served next to the page (export one with
 * `ridesim course --route N --out course.json`).
 */

import { parseCourse } from "./course.js";
import { RiderLink, webSocketFactory } from "./net.js";
import {
  CALIBRATE_PHASES, CalibratePhase, EventMsg, StateMsg, VEHICLES, Vehicle,
  calibrateMsg, setVehicleMsg,
} from "./protocol.js";
import { TopDownRenderer } from "./renderer.js";
import { EventFeed, StateBuffer } from "./statebuf.js";
import { Control, VirtualRig } from "./rig.js";

const SEND_RATE_HZ = 50;

const KEY_BINDINGS: Record<string, Control> = {
  KeyA: "left", ArrowLeft: "left",
  KeyD: "right", ArrowRight: "right",
  KeyW: "fwd", ArrowUp: "fwd",
  KeyS: "back", ArrowDown: "back",
};

function params(): URLSearchParams {
  return new URLSearchParams(window.location.search);
}

async function loadCourse(url: string) {
  const resp = await fetch(url);
  if (!resp.ok) throw new Error(`course fetch failed: ${resp.status}`);
  return parseCourse(await resp.json());
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function start(): Promise<void> {
  const canvas = el<HTMLCanvasElement>("view");
  const statusEl = el<HTMLSpanElement>("status");
  const vehicleSel = el<HTMLSelectElement>("vehicle");
  const wsUrl = params().get("ws")
    ?? `ws://${window.location.hostname || "127.0.0.1"}:8098`;
  const courseUrl = params().get("course") ?? "course.json";

  let course;
  try {
    course = await loadCourse(courseUrl);
  } catch (err) {
    statusEl.textContent = `no course file (${courseUrl}); showing blank map`;
    course = parseCourse({ points: [[0, 0], [200, 0]], spacing: 10 });
  }
  const renderer = new TopDownRenderer(canvas, course);

  const states = new StateBuffer();
  const feed = new EventFeed();
  const rig = new VirtualRig((vehicleSel.value || "escooter") as Vehicle);

  const link = new RiderLink(webSocketFactory, {
    onStatus: (status) => { statusEl.textContent = status; },
    onMessage: (msg) => {
      const now = performance.now();
      if (msg.kind === "state") states.push(msg as StateMsg, now);
      else if (msg.kind === "event") feed.push(msg as EventMsg, now);
    },
  });
  link.connect(wsUrl);

  for (const vehicle of VEHICLES) {
    const opt = document.createElement("option");
    opt.value = vehicle;
    opt.textContent = vehicle;
    vehicleSel.appendChild(opt);
  }
  vehicleSel.value = "escooter";
  const selectVehicle = () => {
    const vehicle = vehicleSel.value as Vehicle;
    rig.setVehicle(vehicle);
    link.send((s, q, t) => setVehicleMsg(s, q, t, vehicle));
  };
  vehicleSel.addEventListener("change", selectVehicle);
  link.send((s, q, t) => setVehicleMsg(s, q, t, rig.vehicle));

  const calPanel = el<HTMLDivElement>("calibration");
  for (const phase of CALIBRATE_PHASES) {
    const btn = document.createElement("button");
    btn.textContent = phase.replace(/_/g, " ");
    btn.addEventListener("click", () => {
      link.send((s, q, t) => calibrateMsg(s, q, t, phase as CalibratePhase));
    });
    calPanel.appendChild(btn);
  }

  window.addEventListener("keydown", (ev) => {
    const control = KEY_BINDINGS[ev.code];
    if (control && !ev.repeat) {
      rig.press(control);
      ev.preventDefault();
    }
  });
  window.addEventListener("keyup", (ev) => {
    const control = KEY_BINDINGS[ev.code];
    if (control) {
      rig.release(control);
      ev.preventDefault();
    }
  });
  window.addEventListener("blur", () => rig.neutral());

  let lastFrame = performance.now();
  let sendAccum = 0;
  const sendInterval = 1000 / SEND_RATE_HZ;
  const loop = (now: number) => {
    const dt = Math.min(now - lastFrame, 100);
    lastFrame = now;
    rig.step(dt);
    sendAccum += dt;
    while (sendAccum >= sendInterval) {
      sendAccum -= sendInterval;
      link.sendFrames(rig.messages(link.sender, link.seqSource(), now));
    }
    renderer.draw({
      state: states.latest(),
      stale: states.stale(now),
      status: link.status,
      toasts: feed.active(now),
      collectedCoins: feed.collectedCoins,
    });
    requestAnimationFrame(loop);
  };
  requestAnimationFrame(loop);
}

start().catch((err) => {
  const statusEl = document.getElementById("status");
  if (statusEl) statusEl.textContent = `failed to start: ${err}`;
});
