/** Figure spec: kind, input CSVs, output path, labels. Loaded from JSON. */

import { readFileSync } from "node:fs";
import { z } from "zod";

export const FIGURE_KINDS = [
  "oracle",
  "learning-rate",
  "cell-size",
  "architecture",
  "diversity",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

const plotSpecSchema = z
  .object({
    kind: z.enum(FIGURE_KINDS),
    inputs: z.array(z.string()).min(1),
    output: z.string(),
    title: z.string().optional(),
    xLabel: z.string().optional(),
    yLabel: z.string().optional(),
    series: z.array(z.string()).optional(),
    width: z.number().int().min(200).default(900),
    height: z.number().int().min(150).default(540),
  })
  .strict();

export type PlotSpec = z.infer<typeof plotSpecSchema>;

export function parseSpec(value: unknown): PlotSpec {
  const spec = plotSpecSchema.parse(value);
  if ((spec.kind === "oracle" || spec.kind === "diversity") && spec.inputs.length !== 1) {
    throw new Error(`${spec.kind} figures take exactly one input CSV, got ${spec.inputs.length}`);
  }
  if (spec.series && spec.series.length !== spec.inputs.length && spec.kind !== "oracle") {
    throw new Error(
      `series labels (${spec.series.length}) must match inputs (${spec.inputs.length})`,
    );
  }
  return spec;
}

export function loadSpec(path: string): PlotSpec {
  let raw: string;
  try {
    raw = readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`${path}: cannot read (${(err as Error).message})`);
  }
  let value: unknown;
  try {
    value = JSON.parse(raw);
  } catch (err) {
    throw new Error(`${path}: invalid JSON (${(err as Error).message})`);
  }
  try {
    return parseSpec(value);
  } catch (err) {
    if (err instanceof z.ZodError) {
      const issue = err.issues[0];
      throw new Error(`${path}: ${issue.path.join(".") || "spec"}: ${issue.message}`);
    }
    throw new Error(`${path}: ${(err as Error).message}`);
  }
}
