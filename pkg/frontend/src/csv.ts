/**
 * Reading the simulator's CSV contract.
 *
 * Files are plain comma-separated with a documented header row; cells never
 * contain commas or quotes.  "NA" marks a value that is intentionally
 * undefined (e.g. no closed form for a baseline) and parses to null.
 */

import { readFileSync } from "fs";

export interface Table {
  path: string;
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string, path = "<string>"): Table {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: empty CSV`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  if (rows.length === 0) {
    throw new Error(`${path}: CSV has a header but no data rows`);
  }
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new Error(
        `${path}: row has ${row.length} cells, header has ${header.length}`,
      );
    }
  }
  return { path, header, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"), path);
}

export function requireColumns(table: Table, names: string[]): void {
  for (const name of names) {
    if (!table.header.includes(name)) {
      throw new Error(`${table.path}: missing column '${name}'`);
    }
  }
}

/** Column as numbers; "NA" becomes null, anything unparsable is an error. */
export function numericColumn(table: Table, name: string): (number | null)[] {
  requireColumns(table, [name]);
  const idx = table.header.indexOf(name);
  return table.rows.map((row) => {
    const cell = row[idx];
    if (cell === "NA") return null;
    if (cell === "inf") return Infinity;
    if (cell === "-inf") return -Infinity;
    const value = Number(cell);
    if (Number.isNaN(value)) {
      throw new Error(`${table.path}: column '${name}': not a number: ${cell}`);
    }
    return value;
  });
}

export function stringColumn(table: Table, name: string): string[] {
  requireColumns(table, [name]);
  const idx = table.header.indexOf(name);
  return table.rows.map((row) => row[idx]);
}

/** The JSON sidecar written next to every CSV, if present. */
export function readSidecar(csvPath: string): Record<string, unknown> | null {
  const path = csvPath.replace(/\.csv$/, ".json");
  try {
    return JSON.parse(readFileSync(path, "utf-8"));
  } catch {
    return null;
  }
}
