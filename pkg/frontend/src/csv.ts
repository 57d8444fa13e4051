/**
 * Minimal CSV reader for the artifacts the sampler CLI writes.
 *
 * Those files never quote or escape fields, so a plain comma split is
 * exact. Cells are kept as strings; numeric conversion is up to the
 * caller because some columns (e.g. `status`, or an empty `kl` for a
 * diverged run) are not numbers.
 */

export interface CsvTable {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split("\n");
  while (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const header = lines[0].split(",");
  const rows: string[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new Error(
        `CSV row ${i + 1} has ${cells.length} cells, header has ${header.length}`
      );
    }
    rows.push(cells);
  }
  return { header, rows };
}

/** Index of a named column, or throw with the available names. */
export function columnIndex(table: CsvTable, name: string): number {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`no column ${name} in CSV (have: ${table.header.join(", ")})`);
  }
  return idx;
}

/** A whole column parsed as finite floats. */
export function numericColumn(table: CsvTable, name: string): Float64Array {
  const idx = columnIndex(table, name);
  const out = new Float64Array(table.rows.length);
  for (let i = 0; i < table.rows.length; i++) {
    const v = Number(table.rows[i][idx]);
    if (!Number.isFinite(v)) {
      throw new Error(`column ${name} row ${i + 2}: not a finite number: ${table.rows[i][idx]!}`);
    }
    out[i] = v;
  }
  return out;
}
