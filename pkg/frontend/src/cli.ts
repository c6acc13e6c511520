#!/usr/bin/env node
/** emaclab-plot <plotspec-file> [...more spec files] */

import * as fs from "node:fs";
import * as path from "node:path";

import { render } from "./render";
import { loadSpec } from "./spec";

export function main(argv: string[]): number {
  if (argv.length === 0 || argv.includes("--help") || argv.includes("-h")) {
    console.log("usage: emaclab-plot <plotspec-file> [...]");
    console.log("renders solver diagnostics CSVs to SVG per the plotspec grammar");
    return argv.length === 0 ? 1 : 0;
  }
  for (const file of argv) {
    const spec = loadSpec(file);
    const svg = render(spec);
    fs.mkdirSync(path.dirname(spec.output), { recursive: true });
    fs.writeFileSync(spec.output, svg);
    console.log(`${file} -> ${spec.output}`);
  }
  return 0;
}

if (require.main === module) {
  try {
    process.exitCode = main(process.argv.slice(2));
  } catch (err) {
    console.error(`emaclab-plot: error: ${(err as Error).message}`);
    process.exitCode = 1;
  }
}
