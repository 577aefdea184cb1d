/** Canvas strip charts.
 *
 * The x axis is anchored to the newest sample's time and spans the ring
 * window; the trace never extends past the last received sample. The y
 * axis autoscales to the visible data with a small pad, except when a
 * fixed range is given (factor-like channels).
 */

import type { TimeRing } from "./ring.js";

/** The 2D-context subset the charts draw with; tests pass a recorder. */
export interface Ctx2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
}

export interface ChartStyle {
  label: string;
  unit: string;
  color: string;
  /** Fixed y range; omit to autoscale. */
  min?: number;
  max?: number;
  digits?: number;
}

const PAD_LEFT = 6;
const PAD_RIGHT = 6;
const PAD_TOP = 18;
const PAD_BOTTOM = 6;

export interface PlottedPoint {
  x: number;
  y: number;
}

/** Draw one chart; returns the plotted pixel points (tests read them). */
export function drawStripChart(
  ctx: Ctx2D, width: number, height: number,
  ring: TimeRing, style: ChartStyle,
): PlottedPoint[] {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#11151a";
  ctx.fillRect(0, 0, width, height);
  ctx.strokeStyle = "#2c343d";
  ctx.lineWidth = 1;
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillStyle = "#9fb0bf";

  const n = ring.length;
  if (n === 0) {
    ctx.fillText(`${style.label}  (no data)`, PAD_LEFT, 13);
    return [];
  }

  const ts = ring.times();
  const vs = ring.values();
  const tEnd = ring.lastT as number;
  const tStart = tEnd - ring.windowS;

  let lo = style.min ?? Infinity;
  let hi = style.max ?? -Infinity;
  if (style.min === undefined || style.max === undefined) {
    for (const v of vs) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    const pad = (hi - lo) < 1e-12 ? Math.max(1e-6, Math.abs(hi) * 0.1) : (hi - lo) * 0.08;
    lo -= pad;
    hi += pad;
  }

  const plotW = width - PAD_LEFT - PAD_RIGHT;
  const plotH = height - PAD_TOP - PAD_BOTTOM;
  const toX = (t: number) =>
    PAD_LEFT + ((t - tStart) / ring.windowS) * plotW;
  const toY = (v: number) =>
    PAD_TOP + (1 - (v - lo) / (hi - lo)) * plotH;

  const points: PlottedPoint[] = [];
  ctx.strokeStyle = style.color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  for (let i = 0; i < n; i += 1) {
    const x = toX(ts[i] as number);
    const y = toY(vs[i] as number);
    points.push({ x, y });
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();

  const digits = style.digits ?? 2;
  const last = vs[n - 1] as number;
  ctx.fillStyle = "#e4ebf2";
  ctx.fillText(
    `${style.label}  ${last.toFixed(digits)} ${style.unit}`, PAD_LEFT, 13);
  return points;
}
