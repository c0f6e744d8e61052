import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface Table {
  path: string;
  columns: string[];
  rows: Record<string, string>[];
}

/** A referenced column is absent from a CSV header. */
export class ColumnError extends Error {
  constructor(
    readonly column: string,
    readonly path: string,
  ) {
    super(`column '${column}' not in header of ${path}`);
  }
}

export function readTable(path: string): Table {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${path}: ${first.message} (row ${first.row})`);
  }
  return { path, columns: parsed.meta.fields ?? [], rows: parsed.data };
}

export function requireColumns(table: Table, columns: string[]): void {
  for (const c of columns) {
    if (!table.columns.includes(c)) throw new ColumnError(c, table.path);
  }
}

/** Numeric cell; empty string (a stage that did not run) comes back null. */
export function num(row: Record<string, string>, column: string): number | null {
  const raw = row[column];
  if (raw === undefined || raw === "") return null;
  const v = Number(raw);
  return Number.isFinite(v) ? v : null;
}
