/** Strict reader for the solver's diagnostics CSV (header + numeric rows). */

import * as fs from "node:fs";

export class CsvError extends Error {}

export interface Table {
  columns: string[];
  data: Map<string, number[]>;
}

export function parseCsv(text: string, source: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) throw new CsvError(`${source}: empty file`);
  const columns = lines[0].split(",").map((s) => s.trim());
  const data = new Map<string, number[]>(columns.map((c) => [c, []]));
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length)
      throw new CsvError(`${source}:${i + 1}: expected ${columns.length} cells, got ${cells.length}`);
    cells.forEach((cell, k) => {
      data.get(columns[k])!.push(Number(cell));
    });
  }
  return { columns, data };
}

export function readCsv(path: string): Table {
  return parseCsv(fs.readFileSync(path, "utf8"), path);
}

export function requireColumn(table: Table, name: string, source: string): number[] {
  const col = table.data.get(name);
  if (col === undefined)
    throw new CsvError(
      `${source}: missing column '${name}' (have: ${table.columns.join(", ")})`,
    );
  return col;
}
