/**
 * Builds chart panels from the recommender's CSV artifacts.
 *
 * Training-curve families read the training-log schema
 * (sequences,epoch,seconds,train_loss,val_sps), the oracle family reads the
 * curve schema (t,sps,prec,rec_normalized; recall arrives pre-normalized),
 * and the diversity family reads aggregate-report rows
 * (method,k,sps,...,item_coverage,seed) with the delta parsed from the
 * method column.
 */

import { basename } from "node:path";
import { numericColumn, readCsv } from "./csv.js";
import { ChartOptions } from "./raster.js";
import { PlotSpec } from "./spec.js";

export const ORACLE_COLUMNS = ["t", "sps", "prec", "rec_normalized"];
export const TRAINING_COLUMNS = ["sequences", "epoch", "seconds", "train_loss", "val_sps"];
export const AGGREGATE_COLUMNS = [
  "method", "k", "sps", "recall", "precision", "user_coverage", "item_coverage", "seed",
];

function stem(path: string): string {
  return basename(path).replace(/\.[^.]*$/, "");
}

function oraclePanels(spec: PlotSpec): ChartOptions[] {
  const path = spec.inputs[0];
  const rows = readCsv(path, ORACLE_COLUMNS);
  const t = numericColumn(rows, "t", path);
  const labels = spec.series ?? ["sps@10", "prec@10", "rec@10 (normalized)"];
  const columns = ["sps", "prec", "rec_normalized"];
  return [{
    title: spec.title,
    xLabel: spec.xLabel ?? "popularity cutoff t",
    yLabel: spec.yLabel ?? "metric value",
    xScale: "log",
    series: columns.map((column, i) => ({
      label: labels[i] ?? column,
      xs: t,
      ys: numericColumn(rows, column, path),
    })),
  }];
}

function trainingPanels(spec: PlotSpec): ChartOptions[] {
  const series = spec.inputs.map((path, i) => {
    const rows = readCsv(path, TRAINING_COLUMNS);
    return {
      label: spec.series?.[i] ?? stem(path),
      xs: numericColumn(rows, "epoch", path),
      ys: numericColumn(rows, "val_sps", path),
    };
  });
  return [{
    title: spec.title,
    xLabel: spec.xLabel ?? "epochs",
    yLabel: spec.yLabel ?? "validation sps@10 (%)",
    xScale: "linear",
    series,
  }];
}

function parseDelta(method: string, path: string, row: number): number {
  const match = method.match(/(\d+(?:\.\d+)?)\s*$/);
  if (!match) {
    throw new Error(`${path}: row ${row}: cannot parse a delta from method '${method}'`);
  }
  return Number(match[1]);
}

function diversityPanels(spec: PlotSpec): ChartOptions[] {
  const path = spec.inputs[0];
  const rows = readCsv(path, AGGREGATE_COLUMNS);
  const order = rows
    .map((row, i) => ({ delta: parseDelta(row.method, path, i + 2), row }))
    .sort((a, b) => a.delta - b.delta);
  const deltas = order.map((e) => e.delta);
  const sps = order.map((e) => Number(e.row.sps));
  const coverage = order.map((e) => Number(e.row.item_coverage));
  const label = spec.series?.[0] ?? "rnn";
  return [
    {
      title: spec.title ?? "accuracy",
      xLabel: spec.xLabel ?? "diversity bias",
      yLabel: spec.yLabel ?? "sps@10 (%)",
      xScale: "linear",
      series: [{ label, xs: deltas, ys: sps }],
    },
    {
      title: "item coverage",
      xLabel: spec.xLabel ?? "diversity bias",
      yLabel: "correctly recommended items",
      xScale: "linear",
      series: [{ label, xs: deltas, ys: coverage }],
    },
  ];
}

/** One chart per panel; diversity figures yield two panels side by side. */
export function buildPanels(spec: PlotSpec): ChartOptions[] {
  switch (spec.kind) {
    case "oracle":
      return oraclePanels(spec);
    case "diversity":
      return diversityPanels(spec);
    default:
      return trainingPanels(spec);
  }
}
