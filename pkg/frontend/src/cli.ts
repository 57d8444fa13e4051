/**
 * Render a comparison figure from a `skewld compare` output directory:
 *
 *   node dist/cli.js --runs <compare-out-dir> --out <figure.png> [--cell N]
 */

import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { loadCompareDir } from "./artifacts.js";
import { renderComparisonFigure } from "./figure.js";
import { encodePng } from "./png.js";

export function main(argv: string[]): number {
  let values: { runs?: string; out?: string; cell?: string };
  try {
    values = parseArgs({
      args: argv,
      options: {
        runs: { type: "string" },
        out: { type: "string" },
        cell: { type: "string" },
      },
    }).values;
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  if (!values.runs || !values.out) {
    console.error("usage: cli --runs <compare-out-dir> --out <figure.png> [--cell N]");
    return 2;
  }
  const cell = values.cell === undefined ? 4 : Number(values.cell);

  try {
    const data = loadCompareDir(values.runs);
    const raster = renderComparisonFigure(data, { cell });
    const png = encodePng(raster);
    writeFileSync(values.out, png);
    const gammas = data.panels.map((p) => p.gamma).join(", ");
    console.log(`${values.out}: ${raster.width}x${raster.height}, gammas ${gammas}`);
    return 0;
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
}

// run only as an entry point, not when imported by tests
if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exitCode = main(process.argv.slice(2));
}
