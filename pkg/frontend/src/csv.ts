/** CSV loading with column validation; errors name the file and column. */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export type Row = Record<string, string>;

export function readCsv(path: string, requiredColumns: string[]): Row[] {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`${path}: cannot read (${(err as Error).message})`);
  }
  const parsed = Papa.parse<Row>(text.trim(), { header: true, skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${path}: parse error at row ${first.row}: ${first.message}`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of requiredColumns) {
    if (!fields.includes(col)) {
      throw new Error(`${path}: missing column '${col}' (found: ${fields.join(", ")})`);
    }
  }
  return parsed.data;
}

export function numericColumn(rows: Row[], column: string, path: string): number[] {
  return rows.map((row, i) => {
    const value = Number(row[column]);
    if (!Number.isFinite(value)) {
      throw new Error(`${path}: row ${i + 2}: column '${column}' is not numeric (${row[column]})`);
    }
    return value;
  });
}
