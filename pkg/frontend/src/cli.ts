/**
 * rmtq-figs render --kind <hist_overlay|hist_grid|ks_loglog>
 *                  --input <experiment.csv> [--ref <reference.csv>]
 *                  --out <figure.svg> [--bin-width W]
 *
 * Exit codes: 0 success, 1 schema/data error, 2 usage error.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { DataError, SchemaError, parseCsv } from "./csv.js";
import { FigureKind, renderFigure } from "./figures.js";

const KINDS: FigureKind[] = ["hist_overlay", "hist_grid", "ks_loglog"];

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        kind: { type: "string" },
        input: { type: "string" },
        ref: { type: "string" },
        out: { type: "string" },
        "bin-width": { type: "string" },
      },
    });
  } catch (err) {
    process.stderr.write(`usage error: ${(err as Error).message}\n`);
    return 2;
  }
  const [command] = parsed.positionals;
  const { kind, input, ref, out } = parsed.values;
  if (command !== "render" || !kind || !input || !out) {
    process.stderr.write(
      "usage: rmtq-figs render --kind KIND --input CSV [--ref CSV] --out SVG [--bin-width W]\n",
    );
    return 2;
  }
  if (!KINDS.includes(kind as FigureKind)) {
    process.stderr.write(`usage error: unknown kind '${kind}' (choose from ${KINDS.join(", ")})\n`);
    return 2;
  }
  const binWidth = parsed.values["bin-width"];
  try {
    const data = parseCsv(readFileSync(input, "utf-8"));
    const refTable = ref ? parseCsv(readFileSync(ref, "utf-8")) : null;
    const svg = renderFigure(kind as FigureKind, data, refTable, {
      binWidth: binWidth === undefined ? undefined : Number(binWidth),
    });
    writeFileSync(out, svg);
    process.stdout.write(`wrote ${out}\n`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof DataError) {
      process.stderr.write(`${err.name}: ${err.message}\n`);
      return 1;
    }
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      process.stderr.write(`file not found: ${(err as Error).message}\n`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
