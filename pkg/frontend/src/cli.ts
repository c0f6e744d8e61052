#!/usr/bin/env node
// Figure regeneration CLI: reads a figure-spec JSON plus the result CSVs it
// points at, writes one SVG. Exit codes follow the producer CLI's contract:
// 0 ok, 1 I/O trouble, 2 invalid spec / missing column.

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { parseArgs } from "node:util";
import { ColumnError, readTable, type Table } from "./csv.js";
import { renderFigure } from "./render.js";
import { loadSpec, SpecError } from "./spec.js";

const USAGE = "usage: sptdiff-render --spec <figure.json> [--out <figure.svg>]";

function isIoError(err: unknown): err is NodeJS.ErrnoException {
  return err instanceof Error && typeof (err as NodeJS.ErrnoException).code === "string";
}

export function main(argv: string[]): number {
  let spec;
  let outArg: string | undefined;
  try {
    const { values } = parseArgs({
      args: argv,
      options: {
        spec: { type: "string" },
        out: { type: "string" },
      },
      strict: true,
    });
    if (values.spec === undefined) {
      console.error(USAGE);
      return 2;
    }
    outArg = values.out;
    spec = loadSpec(values.spec);
  } catch (err) {
    if (err instanceof SpecError) {
      console.error(`spec: ${err.message}`);
      return 2;
    }
    if (isIoError(err)) {
      console.error(`spec: ${err.message}`);
      return 1;
    }
    console.error(`${USAGE}\n${(err as Error).message}`);
    return 2;
  }

  const out = outArg === undefined ? spec.out : resolve(outArg);
  if (out === undefined) {
    console.error("no output path: pass --out or set 'out' in the spec");
    return 2;
  }

  let tables: Table[];
  try {
    tables = spec.csv.map(readTable);
  } catch (err) {
    if (err instanceof ColumnError) {
      console.error(`csv: ${err.message}`);
      return 2;
    }
    console.error(`csv: ${(err as Error).message}`);
    return 1;
  }

  try {
    const { svg, warnings } = renderFigure(spec, tables);
    for (const w of warnings) console.error(`warning: ${w}`);
    mkdirSync(dirname(out), { recursive: true });
    writeFileSync(out, svg);
    console.log(`render: ${spec.kind} -> ${out}`);
    return 0;
  } catch (err) {
    if (err instanceof ColumnError) {
      console.error(`csv: ${err.message}`);
      return 2;
    }
    if (isIoError(err)) {
      console.error(`output: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

// run only when invoked as a script, not when imported by tests; realpath
// so the npm bin symlink still counts
import { realpathSync } from "node:fs";
import { fileURLToPath } from "node:url";

function invokedDirectly(): boolean {
  if (process.argv[1] === undefined) return false;
  try {
    return realpathSync(process.argv[1]) === fileURLToPath(import.meta.url);
  } catch {
    return false;
  }
}

if (invokedDirectly()) {
  process.exit(main(process.argv.slice(2)));
}
