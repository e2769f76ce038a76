/** Command line: `plot <spec.json>` or `plot --input a.csv --out fig.svg ...` */

import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { dirname } from "node:path";
import { concatTables, parseCsv } from "./csv.js";
import { renderSvg } from "./render.js";
import { DEFAULTS, PlotSpec, specFromJson } from "./spec.js";

function specFromFlags(args: string[]): PlotSpec {
  const spec: PlotSpec = {
    input: [],
    groupBy: [...DEFAULTS.groupBy],
    x: DEFAULTS.x,
    y: DEFAULTS.y,
    out: "",
    overlays: [],
  };
  const groupBy: string[] = [];
  for (let i = 0; i < args.length; i += 2) {
    const flag = args[i];
    const value = args[i + 1];
    if (value === undefined) throw new Error(`flag ${flag} needs a value`);
    switch (flag) {
      case "--input": spec.input.push(value); break;
      case "--group-by": groupBy.push(value); break;
      case "--x": spec.x = value; break;
      case "--y": spec.y = value; break;
      case "--out": spec.out = value; break;
      case "--title": spec.title = value; break;
      case "--x-label": spec.xLabel = value; break;
      case "--y-label": spec.yLabel = value; break;
      default: throw new Error(`unknown flag ${flag}`);
    }
  }
  if (groupBy.length) spec.groupBy = groupBy;
  if (!spec.input.length) throw new Error("need at least one --input CSV");
  if (!spec.out) throw new Error("need --out");
  return spec;
}

export function runPlot(spec: PlotSpec): void {
  const tables = spec.input.map((path) =>
    parseCsv(readFileSync(path, "utf-8")),
  );
  const svg = renderSvg(concatTables(tables), spec);
  mkdirSync(dirname(spec.out) || ".", { recursive: true });
  writeFileSync(spec.out, svg, "utf-8");
}

export function main(argv: string[]): number {
  try {
    const [command, ...rest] = argv;
    if (command !== "plot" || rest.length === 0) {
      process.stderr.write(
        "usage: plot <spec.json> | plot --input <csv> --out <svg> " +
          "[--input <csv> ...] [--group-by <col> ...] [--x <col>] [--y <col>] " +
          "[--title <t>] [--x-label <l>] [--y-label <l>]\n",
      );
      return 1;
    }
    const spec = rest[0].startsWith("--")
      ? specFromFlags(rest)
      : specFromJson(JSON.parse(readFileSync(rest[0], "utf-8")));
    runPlot(spec);
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
