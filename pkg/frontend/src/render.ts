/** Ties a figure spec to pixels on disk: build panels, draw, encode PNG. */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";
import { buildPanels } from "./figures.js";
import { encodePng } from "./png.js";
import { Canvas, drawChart } from "./raster.js";
import { PlotSpec } from "./spec.js";

export function renderToPixels(spec: PlotSpec): Canvas {
  const panels = buildPanels(spec);
  const canvas = new Canvas(spec.width, spec.height);
  const panelWidth = Math.floor(spec.width / panels.length);
  panels.forEach((panel, i) => {
    drawChart(canvas, { x: i * panelWidth, y: 0, width: panelWidth, height: spec.height }, panel);
  });
  return canvas;
}

export function renderSpec(spec: PlotSpec): string {
  const canvas = renderToPixels(spec);
  const png = encodePng(canvas.width, canvas.height, canvas.pixels);
  mkdirSync(dirname(spec.output) || ".", { recursive: true });
  writeFileSync(spec.output, png);
  return spec.output;
}
