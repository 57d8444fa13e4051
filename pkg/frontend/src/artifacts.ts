/**
 * Loaders for the artifacts a `skewld compare` run writes:
 *
 *   <dir>/aggregate.json          sweep, grid, per-gamma medians
 *   <dir>/oracle.csv              exact posterior mass per grid cell
 *   <dir>/runs/gamma-G/seed-S/trace.csv   recorded samples per run
 *
 * Only files are read here; the Python package is never imported.
 */

import { readFileSync, readdirSync, statSync } from "node:fs";
import { join } from "node:path";

import { numericColumn, parseCsv } from "./csv.js";
import { Field, GridGeom, fieldFromCells } from "./grid.js";

export interface TraceSamples {
  theta1: Float64Array;
  theta2: Float64Array;
}

export interface GammaPanel {
  gamma: number;
  /** median KL against the oracle, or null if every run at this gamma diverged */
  kl: number | null;
  /** samples pooled over the seeds of this gamma */
  samples: TraceSamples;
}

export interface CompareData {
  geom: GridGeom;
  oracle: Field;
  panels: GammaPanel[];
}

function parseGeom(obj: unknown): GridGeom {
  const grid = (obj as { grid?: { lower: number[]; upper: number[]; bins: number[] } }).grid;
  if (
    !grid ||
    !Array.isArray(grid.lower) ||
    !Array.isArray(grid.upper) ||
    !Array.isArray(grid.bins) ||
    grid.lower.length !== 2 ||
    grid.upper.length !== 2 ||
    grid.bins.length !== 2
  ) {
    throw new Error("aggregate.json has no usable grid section");
  }
  return {
    lower: [grid.lower[0], grid.lower[1]],
    upper: [grid.upper[0], grid.upper[1]],
    bins: [grid.bins[0], grid.bins[1]],
  };
}

export function loadOracleCsv(path: string, geom: GridGeom): Field {
  const table = parseCsv(readFileSync(path, "utf8"));
  return fieldFromCells(
    geom,
    numericColumn(table, "theta1"),
    numericColumn(table, "theta2"),
    numericColumn(table, "density")
  );
}

export function loadTraceCsv(path: string): TraceSamples {
  const table = parseCsv(readFileSync(path, "utf8"));
  return {
    theta1: numericColumn(table, "theta1"),
    theta2: numericColumn(table, "theta2"),
  };
}

/** Subdirectories named `<prefix><number>`, returned with their parsed values. */
function numberedDirs(dir: string, prefix: string): Array<{ value: number; path: string }> {
  const out: Array<{ value: number; path: string }> = [];
  for (const name of readdirSync(dir)) {
    if (!name.startsWith(prefix)) {
      continue;
    }
    const value = Number(name.slice(prefix.length));
    const path = join(dir, name);
    if (Number.isFinite(value) && statSync(path).isDirectory()) {
      out.push({ value, path });
    }
  }
  out.sort((a, b) => a.value - b.value);
  return out;
}

function concat(parts: Float64Array[]): Float64Array {
  const total = parts.reduce((s, p) => s + p.length, 0);
  const out = new Float64Array(total);
  let offset = 0;
  for (const p of parts) {
    out.set(p, offset);
    offset += p.length;
  }
  return out;
}

export function loadCompareDir(dir: string): CompareData {
  const aggregate = JSON.parse(readFileSync(join(dir, "aggregate.json"), "utf8")) as {
    per_gamma?: Array<{ gamma: number; kl_median: number | null }>;
  };
  const geom = parseGeom(aggregate);
  const oracle = loadOracleCsv(join(dir, "oracle.csv"), geom);

  const klByGamma = new Map<number, number | null>();
  for (const entry of aggregate.per_gamma ?? []) {
    klByGamma.set(entry.gamma, entry.kl_median);
  }

  const panels: GammaPanel[] = [];
  for (const gammaDir of numberedDirs(join(dir, "runs"), "gamma-")) {
    const t1: Float64Array[] = [];
    const t2: Float64Array[] = [];
    for (const seedDir of numberedDirs(gammaDir.path, "seed-")) {
      const samples = loadTraceCsv(join(seedDir.path, "trace.csv"));
      t1.push(samples.theta1);
      t2.push(samples.theta2);
    }
    if (t1.length === 0) {
      throw new Error(`no seed directories under ${gammaDir.path}`);
    }
    panels.push({
      gamma: gammaDir.value,
      kl: klByGamma.get(gammaDir.value) ?? null,
      samples: { theta1: concat(t1), theta2: concat(t2) },
    });
  }
  if (panels.length === 0) {
    throw new Error(`no gamma directories under ${join(dir, "runs")}`);
  }
  return { geom, oracle, panels };
}
