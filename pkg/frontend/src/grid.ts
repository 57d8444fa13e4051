/**
 * Cell grids over the (theta1, theta2) plane.
 *
 * Matches the sampler's grid convention: `bins[k]` cells spanning
 * [lower[k], upper[k]) with points on the upper boundary counted into
 * the last cell. Field values are stored theta1-major: index
 * `i * bins[1] + j` holds cell (i, j).
 */

export interface GridGeom {
  lower: [number, number];
  upper: [number, number];
  bins: [number, number];
}

export interface Field {
  geom: GridGeom;
  values: Float64Array;
}

export function cellSize(geom: GridGeom): [number, number] {
  return [
    (geom.upper[0] - geom.lower[0]) / geom.bins[0],
    (geom.upper[1] - geom.lower[1]) / geom.bins[1],
  ];
}

/** Cell-center coordinates along one axis. */
export function centers(geom: GridGeom, axis: 0 | 1): Float64Array {
  const h = cellSize(geom)[axis];
  const out = new Float64Array(geom.bins[axis]);
  for (let k = 0; k < geom.bins[axis]; k++) {
    out[k] = geom.lower[axis] + (k + 0.5) * h;
  }
  return out;
}

function checkGeom(geom: GridGeom): void {
  for (const axis of [0, 1] as const) {
    if (!(geom.upper[axis] > geom.lower[axis])) {
      throw new Error(`grid axis ${axis}: upper must exceed lower`);
    }
    if (!Number.isInteger(geom.bins[axis]) || geom.bins[axis] < 2) {
      throw new Error(`grid axis ${axis}: bins must be an integer >= 2`);
    }
  }
}

export function emptyField(geom: GridGeom): Field {
  checkGeom(geom);
  return { geom, values: new Float64Array(geom.bins[0] * geom.bins[1]) };
}

function binIndex(geom: GridGeom, axis: 0 | 1, t: number): number {
  const lo = geom.lower[axis];
  const hi = geom.upper[axis];
  if (t < lo || t > hi) {
    return -1;
  }
  if (t === hi) {
    // upper boundary belongs to the last cell
    return geom.bins[axis] - 1;
  }
  return Math.floor(((t - lo) / (hi - lo)) * geom.bins[axis]);
}

/**
 * Rebuild a field from (center, center, value) rows, as written by the
 * oracle CSV. Placement is by nearest cell center; a row whose
 * coordinates do not land within a quarter cell of a center is an error
 * (it would mean the CSV and grid disagree).
 */
export function fieldFromCells(
  geom: GridGeom,
  t1: Float64Array,
  t2: Float64Array,
  values: Float64Array
): Field {
  const field = emptyField(geom);
  const [h1, h2] = cellSize(geom);
  const c1 = centers(geom, 0);
  const c2 = centers(geom, 1);
  if (t1.length !== values.length || t2.length !== values.length) {
    throw new Error("cell arrays must have equal length");
  }
  if (values.length !== geom.bins[0] * geom.bins[1]) {
    throw new Error(
      `expected ${geom.bins[0] * geom.bins[1]} cells for this grid, got ${values.length}`
    );
  }
  for (let r = 0; r < values.length; r++) {
    const i = binIndex(geom, 0, t1[r]);
    const j = binIndex(geom, 1, t2[r]);
    if (i < 0 || j < 0) {
      throw new Error(`cell row ${r}: center (${t1[r]}, ${t2[r]}) lies outside the grid`);
    }
    if (Math.abs(t1[r] - c1[i]) > 0.25 * h1 || Math.abs(t2[r] - c2[j]) > 0.25 * h2) {
      throw new Error(`cell row ${r}: (${t1[r]}, ${t2[r]}) is not a cell center of this grid`);
    }
    field.values[i * geom.bins[1] + j] = values[r];
  }
  return field;
}

/** Raw hit counts per cell; points outside the grid are ignored. */
export function histogram(geom: GridGeom, t1: Float64Array, t2: Float64Array): Field {
  if (t1.length !== t2.length) {
    throw new Error("coordinate arrays must have equal length");
  }
  const field = emptyField(geom);
  for (let r = 0; r < t1.length; r++) {
    const i = binIndex(geom, 0, t1[r]);
    const j = binIndex(geom, 1, t2[r]);
    if (i >= 0 && j >= 0) {
      field.values[i * geom.bins[1] + j] += 1;
    }
  }
  return field;
}

export function fieldMax(field: Field): number {
  let m = -Infinity;
  for (const v of field.values) {
    if (v > m) m = v;
  }
  return m;
}

export function fieldSum(field: Field): number {
  let s = 0;
  for (const v of field.values) {
    s += v;
  }
  return s;
}

export function sameGeom(a: GridGeom, b: GridGeom): boolean {
  return (
    a.lower[0] === b.lower[0] &&
    a.lower[1] === b.lower[1] &&
    a.upper[0] === b.upper[0] &&
    a.upper[1] === b.upper[1] &&
    a.bins[0] === b.bins[0] &&
    a.bins[1] === b.bins[1]
  );
}
