/**
 * Pixel-level chart rendering: a white RGBA canvas, Bresenham polylines,
 * bitmap-font text, and a line-chart renderer with linear or log-10 x axes.
 */

import { GLYPH_HEIGHT, GLYPH_SPACING, GLYPH_WIDTH, glyphFor, textWidth } from "./font.js";

export type Color = [number, number, number];

export const PALETTE: Color[] = [
  [31, 119, 180],
  [255, 127, 14],
  [44, 160, 44],
  [214, 39, 40],
  [148, 103, 189],
  [140, 86, 75],
];

const BLACK: Color = [0, 0, 0];
const GRID: Color = [221, 221, 221];

export class Canvas {
  readonly width: number;
  readonly height: number;
  readonly pixels: Uint8Array;

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
    this.pixels = new Uint8Array(width * height * 4).fill(255);
  }

  set(x: number, y: number, [r, g, b]: Color): void {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const at = (y * this.width + x) * 4;
    this.pixels[at] = r;
    this.pixels[at + 1] = g;
    this.pixels[at + 2] = b;
    this.pixels[at + 3] = 255;
  }

  line(x0: number, y0: number, x1: number, y1: number, color: Color, thick = 1): void {
    let ax = Math.round(x0), ay = Math.round(y0);
    const bx = Math.round(x1), by = Math.round(y1);
    const dx = Math.abs(bx - ax), dy = -Math.abs(by - ay);
    const sx = ax < bx ? 1 : -1, sy = ay < by ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.dot(ax, ay, color, thick);
      if (ax === bx && ay === by) break;
      const e2 = 2 * err;
      if (e2 >= dy) { err += dy; ax += sx; }
      if (e2 <= dx) { err += dx; ay += sy; }
    }
  }

  dot(x: number, y: number, color: Color, size = 1): void {
    const r = Math.floor(size / 2);
    for (let oy = -r; oy <= r; oy++) {
      for (let ox = -r; ox <= r; ox++) {
        this.set(x + ox, y + oy, color);
      }
    }
  }

  text(x: number, y: number, str: string, color: Color = BLACK, scale = 1): void {
    let penX = Math.round(x);
    for (const ch of str) {
      const rows = glyphFor(ch);
      for (let gy = 0; gy < GLYPH_HEIGHT; gy++) {
        for (let gx = 0; gx < GLYPH_WIDTH; gx++) {
          if (rows[gy][gx] === "1") {
            for (let sy = 0; sy < scale; sy++) {
              for (let sx = 0; sx < scale; sx++) {
                this.set(penX + gx * scale + sx, y + gy * scale + sy, color);
              }
            }
          }
        }
      }
      penX += (GLYPH_WIDTH + GLYPH_SPACING) * scale;
    }
  }
}

export interface Series {
  label: string;
  xs: number[];
  ys: number[];
}

export interface ChartOptions {
  title?: string;
  xLabel: string;
  yLabel: string;
  xScale: "linear" | "log";
  series: Series[];
}

export interface Rect {
  x: number;
  y: number;
  width: number;
  height: number;
}

function niceTicks(min: number, max: number, count = 5): number[] {
  if (!(max > min)) return [min];
  const span = max - min;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 2.5 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / chosen) * chosen; v <= max + 1e-12; v += chosen) {
    ticks.push(Number(v.toFixed(12)));
  }
  return ticks;
}

function logTicks(min: number, max: number): number[] {
  const ticks: number[] = [];
  for (let p = Math.ceil(Math.log10(min)); Math.pow(10, p) <= max * (1 + 1e-12); p++) {
    ticks.push(Math.pow(10, p));
  }
  if (ticks.length === 0 || ticks[0] > min * (1 + 1e-12)) ticks.unshift(min);
  return ticks;
}

function formatTick(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 10000 || abs < 0.001) return v.toExponential(0).replace("e+", "e");
  const rounded = Number(v.toPrecision(4));
  return String(rounded);
}

/** Draw one line chart into the given sub-rectangle of the canvas. */
export function drawChart(canvas: Canvas, rect: Rect, opts: ChartOptions): void {
  const margin = { left: 58, right: 14, top: opts.title ? 26 : 14, bottom: 40 };
  const plot: Rect = {
    x: rect.x + margin.left,
    y: rect.y + margin.top,
    width: rect.width - margin.left - margin.right,
    height: rect.height - margin.top - margin.bottom,
  };

  const allX = opts.series.flatMap((s) => s.xs);
  const allY = opts.series.flatMap((s) => s.ys);
  if (allX.length === 0) throw new Error("chart has no points");
  let xMin = Math.min(...allX), xMax = Math.max(...allX);
  let yMin = Math.min(...allY), yMax = Math.max(...allY);
  if (opts.xScale === "log" && xMin <= 0) {
    throw new Error("log x axis requires positive x values");
  }
  if (yMin === yMax) { yMin -= 1; yMax += 1; }
  if (xMin === xMax) { xMin -= 1; xMax += 1; }
  const yPad = 0.05 * (yMax - yMin);
  yMin -= yPad;
  yMax += yPad;

  const toX = (v: number): number => {
    const t = opts.xScale === "log"
      ? (Math.log10(v) - Math.log10(xMin)) / (Math.log10(xMax) - Math.log10(xMin))
      : (v - xMin) / (xMax - xMin);
    return plot.x + t * plot.width;
  };
  const toY = (v: number): number => plot.y + plot.height - ((v - yMin) / (yMax - yMin)) * plot.height;

  const xTicks = opts.xScale === "log" ? logTicks(xMin, xMax) : niceTicks(xMin, xMax);
  const yTicks = niceTicks(yMin, yMax);
  for (const t of xTicks) {
    const px = toX(t);
    canvas.line(px, plot.y, px, plot.y + plot.height, GRID);
    const label = formatTick(t);
    canvas.text(px - textWidth(label) / 2, plot.y + plot.height + 6, label);
  }
  for (const t of yTicks) {
    const py = toY(t);
    canvas.line(plot.x, py, plot.x + plot.width, py, GRID);
    const label = formatTick(t);
    canvas.text(plot.x - textWidth(label) - 6, py - GLYPH_HEIGHT / 2, label);
  }

  // axes frame
  canvas.line(plot.x, plot.y, plot.x, plot.y + plot.height, BLACK);
  canvas.line(plot.x, plot.y + plot.height, plot.x + plot.width, plot.y + plot.height, BLACK);

  opts.series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length];
    const pts = s.xs.map((x, i) => [toX(x), toY(s.ys[i])] as const);
    for (let i = 1; i < pts.length; i++) {
      canvas.line(pts[i - 1][0], pts[i - 1][1], pts[i][0], pts[i][1], color, 2);
    }
    for (const [px, py] of pts) canvas.dot(px, py, color, 3);
  });

  // legend, top-left inside the plot
  let legendY = plot.y + 6;
  opts.series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length];
    canvas.line(plot.x + 8, legendY + 3, plot.x + 26, legendY + 3, color, 2);
    canvas.text(plot.x + 32, legendY, s.label);
    legendY += GLYPH_HEIGHT + 4;
  });

  if (opts.title) {
    canvas.text(rect.x + (rect.width - textWidth(opts.title)) / 2, rect.y + 8, opts.title);
  }
  canvas.text(
    plot.x + (plot.width - textWidth(opts.xLabel)) / 2,
    plot.y + plot.height + 6 + GLYPH_HEIGHT + 8,
    opts.xLabel,
  );
  // y label, horizontal at the top-left corner above the axis
  canvas.text(rect.x + 4, Math.max(rect.y + 2, plot.y - GLYPH_HEIGHT - 4), opts.yLabel);
}
