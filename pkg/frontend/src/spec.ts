/**
 * Plot specification: the same flat `key = value` grammar the solver uses
 * for run configurations ('#' comments, blank lines ignored).
 */

import * as fs from "node:fs";
import * as path from "node:path";

export interface SeriesInput {
  path: string;
  label: string;
}

export interface PlotSpec {
  output: string;
  title: string;
  xcolumn: string;
  columns: string[];
  yscale: "linear" | "log";
  xlabel: string;
  ylabel: string;
  ylim?: [number, number];
  width: number;
  height: number;
  inputs: SeriesInput[];
}

export class SpecError extends Error {}

export function parsePairs(text: string): Map<string, string> {
  const out = new Map<string, string>();
  text.split(/\r?\n/).forEach((raw, idx) => {
    const line = raw.split("#", 1)[0].trim();
    if (!line) return;
    const eq = line.indexOf("=");
    if (eq < 0) throw new SpecError(`line ${idx + 1}: expected 'key = value'`);
    const key = line.slice(0, eq).trim();
    const value = line.slice(eq + 1).trim();
    if (!key || !value) throw new SpecError(`line ${idx + 1}: empty key or value`);
    if (out.has(key)) throw new SpecError(`line ${idx + 1}: duplicate key '${key}'`);
    out.set(key, value);
  });
  return out;
}

export function parseSpec(text: string, baseDir: string): PlotSpec {
  const pairs = parsePairs(text);
  const take = (key: string, fallback?: string): string => {
    const v = pairs.get(key);
    if (v === undefined) {
      if (fallback === undefined) throw new SpecError(`missing required key '${key}'`);
      return fallback;
    }
    pairs.delete(key);
    return v;
  };

  const output = path.resolve(baseDir, take("output"));
  const title = take("title", "");
  const xcolumn = take("xcolumn", "t");
  const columns = take("columns").split(",").map((s) => s.trim()).filter(Boolean);
  if (columns.length === 0) throw new SpecError("'columns' must name at least one column");
  const yscale = take("yscale", "linear");
  if (yscale !== "linear" && yscale !== "log")
    throw new SpecError(`yscale must be 'linear' or 'log', got '${yscale}'`);
  const xlabel = take("xlabel", xcolumn);
  const ylabel = take("ylabel", columns.join(", "));
  const ylimRaw = pairs.get("ylim");
  pairs.delete("ylim");
  let ylim: [number, number] | undefined;
  if (ylimRaw !== undefined) {
    const parts = ylimRaw.split(",").map((s) => Number(s.trim()));
    if (parts.length !== 2 || parts.some((v) => !Number.isFinite(v)) || parts[0] >= parts[1])
      throw new SpecError(`ylim must be 'low,high' with low < high, got '${ylimRaw}'`);
    ylim = [parts[0], parts[1]];
  }
  const width = Number(take("width", "800"));
  const height = Number(take("height", "560"));
  if (!Number.isFinite(width) || !Number.isFinite(height) || width <= 0 || height <= 0)
    throw new SpecError("width and height must be positive numbers");

  const inputs: SeriesInput[] = [];
  for (let i = 0; ; i++) {
    const p = pairs.get(`input.${i}.path`);
    if (p === undefined) break;
    pairs.delete(`input.${i}.path`);
    const label = pairs.get(`input.${i}.label`) ?? path.basename(p);
    pairs.delete(`input.${i}.label`);
    inputs.push({ path: path.resolve(baseDir, p), label });
  }
  if (inputs.length === 0) throw new SpecError("no inputs: expected 'input.0.path = ...'");
  if (pairs.size > 0)
    throw new SpecError(`unknown keys: ${[...pairs.keys()].join(", ")}`);

  return { output, title, xcolumn, columns, yscale, xlabel, ylabel, ylim, width, height, inputs };
}

export function loadSpec(filePath: string): PlotSpec {
  const text = fs.readFileSync(filePath, "utf8");
  return parseSpec(text, path.dirname(path.resolve(filePath)));
}
