/** Entry point: wires the WebSocket, pointer input, and the render loop.
 *
 * Single rendering loop (requestAnimationFrame); network events only
 * mutate state objects that the next frame reads.  Commands are
 * fire-and-await-ack through the AckQueue.
 */

import { AckQueue, drawPathCommand, setGoalCommand, startScenarioCommand, stopCommand } from "./commands.js";
import { FleetView } from "./fleet.js";
import { renderFrame } from "./render.js";
import { processStroke } from "./stroke.js";
import { parseMessage } from "./telemetry.js";
import { makeViewport, screenToWorld, type Viewport } from "./transform.js";
import { DEFAULT_ARENA, type Ack, type Arena, type ConsoleCommand, type Point } from "./types.js";

const RECONNECT_DELAY_MS = 1000;

class Console {
  arena: Arena = { ...DEFAULT_ARENA };
  fleet = new FleetView();
  acks = new AckQueue();
  ws: WebSocket | null = null;
  connected = false;
  mode: "draw" | "goal" = "draw";
  stroke: Point[] | null = null;
  vp: Viewport;

  constructor(
    readonly canvas: HTMLCanvasElement,
    readonly banner: HTMLElement,
    readonly toastBox: HTMLElement,
    readonly status: HTMLElement,
    readonly wsUrl: string,
  ) {
    this.vp = makeViewport(this.arena, canvas.width, canvas.height);
  }

  connect(): void {
    const ws = new WebSocket(this.wsUrl);
    this.ws = ws;
    ws.onopen = () => {
      this.connected = true;
      this.banner.hidden = true;
    };
    ws.onmessage = (ev) => {
      const msg = parseMessage(String(ev.data));
      if (msg.type === "frame") {
        this.fleet.ingest(msg.frame, performance.now());
      } else if (msg.type === "ack") {
        if (!this.acks.settle(msg.ack)) {
          console.warn("unsolicited ack", msg.ack);
        }
      } else {
        console.warn("malformed message:", msg.reason);
      }
    };
    ws.onclose = () => {
      this.connected = false;
      this.banner.hidden = false;
      this.acks.abortAll("connection lost");
      this.fleet.clear(); // server state survives; the view resyncs on reconnect
      setTimeout(() => this.connect(), RECONNECT_DELAY_MS);
    };
    ws.onerror = () => ws.close();
  }

  async send(cmd: ConsoleCommand): Promise<Ack | null> {
    if (!this.connected || this.ws === null) {
      this.toast("not connected");
      return null;
    }
    this.ws.send(JSON.stringify(cmd));
    try {
      const ack = await this.acks.expect();
      if (!ack.ok) this.toast(`${ack.cmd} rejected: ${ack.error ?? "unknown reason"}`);
      return ack;
    } catch {
      this.toast("connection lost before ack");
      return null;
    }
  }

  toast(message: string): void {
    const el = document.createElement("div");
    el.className = "toast";
    el.textContent = message;
    this.toastBox.appendChild(el);
    setTimeout(() => el.remove(), 3000);
  }

  pointerWorld(ev: PointerEvent): Point {
    const rect = this.canvas.getBoundingClientRect();
    return screenToWorld(this.vp, {
      x: ((ev.clientX - rect.left) / rect.width) * this.canvas.width,
      y: ((ev.clientY - rect.top) / rect.height) * this.canvas.height,
    });
  }

  onPointerDown(ev: PointerEvent): void {
    const p = this.pointerWorld(ev);
    const hit = this.fleet.hitTest(p);
    if (hit !== null) {
      this.fleet.select(this.fleet.selected === hit ? null : hit);
      this.updateStatus();
      return;
    }
    if (this.fleet.selected === null) return;
    if (this.mode === "goal") {
      void this.send(setGoalCommand(this.fleet.selected, p));
      return;
    }
    // drawing armed only while a vehicle is selected
    this.stroke = [p];
    this.canvas.setPointerCapture(ev.pointerId);
  }

  onPointerMove(ev: PointerEvent): void {
    if (this.stroke !== null) this.stroke.push(this.pointerWorld(ev));
  }

  onPointerUp(): void {
    if (this.stroke === null) return;
    const samples = this.stroke;
    this.stroke = null;
    const selected = this.fleet.selected;
    if (selected === null) return;
    const waypoints = processStroke(samples, this.arena);
    if (waypoints === null) {
      this.toast("stroke too short — draw a longer path");
      return;
    }
    void this.send(drawPathCommand(selected, waypoints));
  }

  updateStatus(): void {
    this.status.textContent =
      this.fleet.selected === null
        ? "no vehicle selected — click a glyph"
        : `vehicle ${this.fleet.selected} selected — ${this.mode === "draw" ? "drag to draw a path" : "click to set a goal"}`;
  }

  loop = (): void => {
    const ctx = this.canvas.getContext("2d");
    if (ctx !== null) {
      renderFrame(ctx, this.vp, this.arena, this.fleet, {
        stale: this.fleet.isStale(performance.now()),
        strokePreview: this.stroke,
      });
    }
    requestAnimationFrame(this.loop);
  };
}

function setup(): void {
  const canvas = document.getElementById("arena") as HTMLCanvasElement;
  const banner = document.getElementById("banner") as HTMLElement;
  const toastBox = document.getElementById("toasts") as HTMLElement;
  const status = document.getElementById("status") as HTMLElement;
  const wsUrl = `ws://${location.hostname || "localhost"}:8080/ws`;
  const app = new Console(canvas, banner, toastBox, status, wsUrl);

  canvas.addEventListener("pointerdown", (ev) => app.onPointerDown(ev));
  canvas.addEventListener("pointermove", (ev) => app.onPointerMove(ev));
  canvas.addEventListener("pointerup", () => app.onPointerUp());

  const scenarioSelect = document.getElementById("scenario") as HTMLSelectElement;
  (document.getElementById("start") as HTMLButtonElement).onclick = () =>
    void app.send(startScenarioCommand(scenarioSelect.value));
  (document.getElementById("stop") as HTMLButtonElement).onclick = () =>
    void app.send(stopCommand());
  const modeButton = document.getElementById("mode") as HTMLButtonElement;
  modeButton.onclick = () => {
    app.mode = app.mode === "draw" ? "goal" : "draw";
    modeButton.textContent = app.mode === "draw" ? "mode: draw path" : "mode: set goal";
    app.updateStatus();
  };

  app.updateStatus();
  app.connect();
  requestAnimationFrame(app.loop);
}

setup();
