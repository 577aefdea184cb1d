/** Dashboard wiring: one socket in, one command queue out, rAF drawing.
 *
 * Every number on screen comes straight out of a received message; the
 * page holds no simulation knowledge of its own. Buttons that sent a
 * command stay disabled until the server acks or rejects it (replies
 * come back in send order, so a FIFO of button ids is enough).
 */

import { badgeColor } from "./badge.js";
import {
  bodyApproachCommand,
  bodyContactCommand,
  graspCommand,
  parseManualCommand,
  patientMoveCommand,
  pauseCommand,
  pushCommand,
  releaseCommand,
  resetCommand,
  resumeCommand,
  setParamCommand,
  type Side,
} from "./commands.js";
import { drawStripChart, type ChartStyle } from "./charts.js";
import type { ClientCommand, ServerMessage } from "./protocol.js";
import { Session, type ChartChannel } from "./session.js";
import { SteeringSocket } from "./socket.js";

const session = new Session(60);
const ackQueue: (HTMLButtonElement | null)[] = [];
let drawnFrames = 0;
let lastDrawnCount = -1;
const drawTimes: number[] = [];
const stateTimes: number[] = [];

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el;
}

const socket = new SteeringSocket(wsUrl(), {
  onOpen: () => setStatus("connected, waiting for hello"),
  onClose: () => {
    session.socketClosed();
    setStatus("disconnected");
  },
  onParseError: (error) => setError(`bad message from server: ${error}`),
  onMessage: (msg: ServerMessage, wallMs: number) => {
    session.apply(msg, wallMs);
    if (msg.kind === "state") stateTimes.push(performance.now());
    if (msg.kind === "ack" || msg.kind === "error") {
      const btn = ackQueue.shift();
      if (btn) btn.disabled = false;
      if (msg.kind === "error") setError(`server rejected: ${session.lastError}`);
    }
    if (msg.kind === "hello") onHello();
    if (msg.kind === "done") setStatus(`run finished at t=${msg.payload.t_final.toFixed(2)} s`);
  },
});

function wsUrl(): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}/ws`;
}

function setStatus(text: string): void {
  $("status").textContent = text;
}

function setError(text: string): void {
  $("last-error").textContent = text;
}

function sendCommand(cmd: ClientCommand, btn: HTMLButtonElement | null): void {
  if (!socket.send(cmd)) {
    setError("not connected; command not sent");
    return;
  }
  session.commandSent(cmd.kind, Date.now());
  ackQueue.push(btn);
  if (btn) btn.disabled = true;
}

// ---- controls -------------------------------------------------------------

interface SliderSpec {
  id: string;
  label: string;
  min: number;
  max: number;
  step: number;
  value: number;
}

function addSlider(container: HTMLElement, spec: SliderSpec,
                   onCommit?: (value: number) => void): HTMLInputElement {
  const row = document.createElement("label");
  row.className = "slider-row";
  const name = document.createElement("span");
  name.textContent = spec.label;
  const input = document.createElement("input");
  input.type = "range";
  input.id = spec.id;
  input.min = String(spec.min);
  input.max = String(spec.max);
  input.step = String(spec.step);
  input.value = String(spec.value);
  const val = document.createElement("span");
  val.className = "slider-val";
  val.textContent = String(spec.value);
  input.addEventListener("input", () => {
    val.textContent = input.value;
  });
  if (onCommit) {
    input.addEventListener("change", () => onCommit(Number(input.value)));
  }
  row.append(name, input, val);
  container.appendChild(row);
  return input;
}

function sliderValue(id: string): number {
  return Number(($(id) as HTMLInputElement).value);
}

function selectedSide(): Side {
  const checked = document.querySelector<HTMLInputElement>(
    "input[name=side]:checked");
  return checked !== null && checked.value === "left" ? "left" : "right";
}

function simNow(): number {
  return session.latest === null ? 0 : session.latest.time_s;
}

function buildEventControls(): void {
  const box = $("event-sliders");
  addSlider(box, { id: "s-approach", label: "grasp approach (s)", min: 0.2, max: 3, step: 0.1, value: 1.5 });
  addSlider(box, { id: "s-hold", label: "grasp hold (s)", min: 1, max: 8, step: 0.5, value: 3 });
  addSlider(box, { id: "s-drag", label: "grasp drag (m)", min: 0, max: 0.08, step: 0.005, value: 0.03 });
  addSlider(box, { id: "s-push", label: "push (N)", min: 0, max: 30, step: 1, value: 15 });
  addSlider(box, { id: "s-push-dur", label: "push length (s)", min: 0.2, max: 2, step: 0.1, value: 0.8 });
  addSlider(box, { id: "s-min-dist", label: "body distance (m)", min: 0.05, max: 0.3, step: 0.01, value: 0.12 });
  addSlider(box, { id: "s-joint", label: "contact joint", min: 1, max: 7, step: 1, value: 3 });
  addSlider(box, { id: "s-torque", label: "contact torque (Nm)", min: 0, max: 5, step: 0.25, value: 2 });
  addSlider(box, { id: "s-body-dur", label: "body event (s)", min: 1, max: 8, step: 0.5, value: 3 });
  addSlider(box, { id: "s-shift", label: "patient shift (m)", min: -0.06, max: 0.06, step: 0.005, value: 0.045 });

  wireButton("btn-grasp", () => graspCommand(simNow(), {
    approachS: sliderValue("s-approach"),
    holdS: sliderValue("s-hold"),
    dragMagnitude: sliderValue("s-drag"),
  }));
  wireButton("btn-release", () => releaseCommand(simNow(), 1.5));
  wireButton("btn-push", () => pushCommand(simNow(), {
    magnitude: sliderValue("s-push"),
    durationS: sliderValue("s-push-dur"),
  }));
  wireButton("btn-approach", () => bodyApproachCommand(simNow(), {
    side: selectedSide(),
    minDistance: sliderValue("s-min-dist"),
    durationS: sliderValue("s-body-dur"),
  }));
  wireButton("btn-contact", () => bodyContactCommand(simNow(), {
    side: selectedSide(),
    joint: sliderValue("s-joint"),
    torque: sliderValue("s-torque"),
    minDistance: sliderValue("s-min-dist"),
    durationS: sliderValue("s-body-dur"),
  }));
  wireButton("btn-move", () => patientMoveCommand(simNow(), {
    displacement: [sliderValue("s-shift"), 0, 0],
    durationS: 2,
  }));
  wireButton("btn-pause", () => pauseCommand());
  wireButton("btn-resume", () => resumeCommand());
  wireButton("btn-reset", () => resetCommand());

  $("raw-send").addEventListener("click", () => {
    const text = ($("raw-json") as HTMLTextAreaElement).value;
    const parsed = parseManualCommand(text);
    const errBox = $("raw-error");
    if (!parsed.ok) {
      errBox.textContent = parsed.error;
      return;
    }
    errBox.textContent = "";
    sendCommand(parsed.cmd, $("raw-send") as HTMLButtonElement);
  });
}

function wireButton(id: string, build: () => ClientCommand): void {
  const btn = $(id) as HTMLButtonElement;
  btn.addEventListener("click", () => sendCommand(build(), btn));
}

/** Parameter sliders appear once the hello message carries defaults. */
function onHello(): void {
  if (session.hello === null) return;
  const scenario = session.hello.scenario as Record<string, Record<string, number>>;
  setStatus(`connected, dt=${session.hello.dt} s, duration=${session.hello.duration_s} s, speed x${session.hello.speed}`);
  const box = $("param-sliders");
  box.textContent = "";
  const factors = scenario.factors ?? {};
  const thresholds = scenario.thresholds ?? {};
  const ranges: Record<string, [number, number, number]> = {
    r_h: [0.02, 0.3, 0.005], r_b: [0.05, 0.5, 0.005], r_p: [0.01, 0.2, 0.005],
    f_0: [2, 30, 0.5], tau_0: [0.5, 6, 0.1],
    a_ht: [0.05, 0.95, 0.05], a_pt: [0.05, 0.95, 0.05],
    a_ft: [0.01, 0.5, 0.01], a_bt: [0.05, 0.95, 0.05],
    a_nt: [0.05, 0.95, 0.05], eps: [0.005, 0.1, 0.005],
  };
  for (const [group, values] of [["factors", factors], ["thresholds", thresholds]] as const) {
    for (const [key, value] of Object.entries(values)) {
      if (!(key in ranges) || typeof value !== "number") continue;
      const [min, max, step] = ranges[key] as [number, number, number];
      addSlider(box, { id: `p-${group}-${key}`, label: `${group}.${key}`, min, max, step, value },
                (v) => sendCommand(setParamCommand(`${group}.${key}`, v), null));
    }
  }
  const gains = scenario.gains as Record<string, unknown> | undefined;
  const k2g = typeof gains?.k2g === "number" ? (gains.k2g as number) : 10;
  addSlider(box, { id: "p-k2g", label: "gains.k2g", min: 1, max: 40, step: 1, value: k2g },
            (v) => sendCommand(setParamCommand("gains.k2g", v), null));
}

// ---- drawing --------------------------------------------------------------

const CHART_STYLES: Record<ChartChannel, ChartStyle> = {
  k_d1: { label: "k_d1 translational stiffness", unit: "N/m", color: "#64b5f6", digits: 0 },
  k_d2: { label: "k_d2 posture stiffness", unit: "Nm/rad", color: "#4db6ac", digits: 2 },
  err_norm: { label: "pose error |x~1|", unit: "m", color: "#ffb74d", digits: 4 },
  f_z_E: { label: "probe force f_z_E", unit: "N", color: "#e57373", digits: 2 },
};

const FACTOR_THRESHOLD: Record<string, string> = {
  a_h: "a_ht", a_p: "a_pt", a_f: "a_ft", a_n: "a_nt", a_b: "a_bt",
};

function drawCharts(): void {
  for (const channel of Object.keys(CHART_STYLES) as ChartChannel[]) {
    const canvas = $(`chart-${channel}`) as HTMLCanvasElement;
    const ctx = canvas.getContext("2d");
    if (ctx === null) continue;
    drawStripChart(ctx, canvas.width, canvas.height,
                   session.rings[channel], CHART_STYLES[channel]);
  }
}

function drawBars(): void {
  const latest = session.latest;
  if (latest === null) return;
  const thresholds = (session.hello?.scenario.thresholds ?? {}) as Record<string, number>;
  for (const name of ["a_h", "a_p", "a_f", "a_n", "a_b"] as const) {
    const fill = $(`bar-${name}`);
    const value = latest[name];
    fill.style.width = `${Math.round(value * 1000) / 10}%`;
    $(`bar-${name}-val`).textContent = value.toFixed(3);
    const tick = $(`bar-${name}-tick`);
    const tKey = FACTOR_THRESHOLD[name] as string;
    const tVal = thresholds[tKey];
    if (typeof tVal === "number") {
      tick.style.left = `${tVal * 100}%`;
      tick.style.display = "block";
    }
  }
}

function drawBadgeAndReadouts(): void {
  const latest = session.latest;
  if (latest === null) return;
  const badge = $("badge");
  badge.textContent = latest.mode;
  badge.style.background = badgeColor(latest.mode);
  $("sim-time").textContent = `t = ${latest.time_s.toFixed(2)} s`;
  $("readout-x2d").textContent = latest.x_2d.toFixed(4);
  $("readout-x2").textContent = latest.x2.toFixed(4);
  $("readout-taun").textContent = latest.tau_n_norm.toFixed(3);
  $("readout-energy").textContent = latest.energy_residual.toExponential(2);
}

function ratePerSecond(stamps: number[], nowMs: number, windowMs: number): number {
  while (stamps.length > 0 && (stamps[0] as number) < nowMs - windowMs) {
    stamps.shift();
  }
  return (stamps.length * 1000) / windowMs;
}

function frame(): void {
  const nowMs = performance.now();
  if (session.framesReceived !== lastDrawnCount) {
    lastDrawnCount = session.framesReceived;
    drawnFrames += 1;
    drawTimes.push(nowMs);
    drawCharts();
    drawBars();
    drawBadgeAndReadouts();
  }
  const stateRate = ratePerSecond(stateTimes, nowMs, 2000);
  const drawRate = ratePerSecond(drawTimes, nowMs, 2000);
  $("fps").textContent =
    `state ${stateRate.toFixed(1)}/s, drawn ${drawRate.toFixed(1)}/s`;
  const stale = session.isStale(Date.now());
  $("stale").style.display =
    stale || session.connection === "closed" ? "inline" : "none";
  requestAnimationFrame(frame);
}

buildEventControls();
socket.connect();
requestAnimationFrame(frame);
