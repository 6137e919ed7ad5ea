export { FIGURE_KINDS, loadSpec, parseSpec, type FigureKind, type PlotSpec } from "./spec.js";
export { buildPanels, AGGREGATE_COLUMNS, ORACLE_COLUMNS, TRAINING_COLUMNS } from "./figures.js";
export { renderSpec, renderToPixels } from "./render.js";
export { encodePng } from "./png.js";
export { Canvas, drawChart, type ChartOptions, type Series } from "./raster.js";
export { readCsv, numericColumn } from "./csv.js";
