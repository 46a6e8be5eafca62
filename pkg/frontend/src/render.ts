/**
 * CLI: render <in.csv> <out.svg> [--title ...] [--group-by ...]
 *
 * Converts a bench CSV into a power-versus-runtime SVG figure. Exits 2 on
 * usage errors, 1 on schema violations (with the offending row number).
 */

import { readFileSync, writeFileSync } from "fs";

import { parseBenchCsv, SchemaError } from "./schema";
import { groupSeries } from "./series";
import { renderSvg } from "./svg";

export function renderFile(
  inputPath: string,
  outputPath: string,
  options: { title?: string; groupBy?: string } = {},
): void {
  const rows = parseBenchCsv(readFileSync(inputPath, "utf-8"));
  const series = groupSeries(rows, options.groupBy);
  const svg = renderSvg(series, options.title ?? "power vs runtime");
  writeFileSync(outputPath, svg, "utf-8");
}

export function main(argv: string[]): number {
  const positionals: string[] = [];
  const options: { title?: string; groupBy?: string } = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--title" || arg === "--group-by") {
      const value = argv[++i];
      if (value === undefined) {
        console.error(`usage error: ${arg} needs a value`);
        return 2;
      }
      if (arg === "--title") {
        options.title = value;
      } else {
        options.groupBy = value;
      }
    } else if (arg.startsWith("--")) {
      console.error(`usage error: unknown flag ${arg}`);
      return 2;
    } else {
      positionals.push(arg);
    }
  }
  if (positionals.length !== 2) {
    console.error("usage: render <in.csv> <out.svg> [--title ...] [--group-by ...]");
    return 2;
  }
  try {
    renderFile(positionals[0], positionals[1], options);
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 1;
    }
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
