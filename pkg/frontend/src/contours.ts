/**
 * Highest-density contour levels and marching-squares extraction.
 *
 * Levels are picked by mass: the level for fraction q is the largest
 * cell value v such that cells with value >= v together hold at least
 * q of the total mass. Contours of the exact posterior at
 * q in {0.5, 0.75, 0.9, 0.97} outline the regions a well-mixed sampler
 * should fill.
 */

import { Field, cellSize, centers } from "./grid.js";

export const DEFAULT_MASS_FRACTIONS = [0.5, 0.75, 0.9, 0.97];

/** Cell-value thresholds whose superlevel sets hold the given mass fractions. */
export function massLevels(field: Field, fractions: number[] = DEFAULT_MASS_FRACTIONS): number[] {
  for (const q of fractions) {
    if (!(q > 0 && q < 1)) {
      throw new Error(`mass fractions must lie in (0, 1), got ${q}`);
    }
  }
  const sorted = Array.from(field.values).sort((a, b) => b - a);
  const total = sorted.reduce((s, v) => s + v, 0);
  if (!(total > 0)) {
    throw new Error("field has no mass");
  }
  const levels: number[] = [];
  for (const q of fractions) {
    let acc = 0;
    let level = sorted[0];
    for (const v of sorted) {
      acc += v;
      level = v;
      if (acc >= q * total) {
        break;
      }
    }
    levels.push(level);
  }
  return levels;
}

export interface Segment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

/**
 * Marching squares over the cell-centered field at one threshold.
 *
 * Corners of each 2x2 block of neighbouring cell centers are classified
 * as inside (value >= level) or outside; crossing points are placed by
 * linear interpolation along block edges. Saddle blocks are split by the
 * block average. Segments come back in data coordinates, ordered by
 * block (theta1-major), so the output is deterministic.
 */
export function marchingSquares(field: Field, level: number): Segment[] {
  const { bins } = field.geom;
  const c1 = centers(field.geom, 0);
  const c2 = centers(field.geom, 1);
  const v = (i: number, j: number) => field.values[i * bins[1] + j];
  const segments: Segment[] = [];

  // crossing point between two corner values along one axis
  const lerp = (a: number, b: number, pa: number, pb: number) =>
    pa + ((level - a) / (b - a)) * (pb - pa);

  for (let i = 0; i < bins[0] - 1; i++) {
    for (let j = 0; j < bins[1] - 1; j++) {
      const a = v(i, j); // (lo, lo)
      const b = v(i + 1, j); // (hi, lo)
      const c = v(i + 1, j + 1); // (hi, hi)
      const d = v(i, j + 1); // (lo, hi)
      let code = 0;
      if (a >= level) code |= 1;
      if (b >= level) code |= 2;
      if (c >= level) code |= 4;
      if (d >= level) code |= 8;
      if (code === 0 || code === 15) {
        continue;
      }
      // edge crossing points: bottom, right, top, left
      const bot = (): [number, number] => [lerp(a, b, c1[i], c1[i + 1]), c2[j]];
      const rgt = (): [number, number] => [c1[i + 1], lerp(b, c, c2[j], c2[j + 1])];
      const top = (): [number, number] => [lerp(d, c, c1[i], c1[i + 1]), c2[j + 1]];
      const lft = (): [number, number] => [c1[i], lerp(a, d, c2[j], c2[j + 1])];

      const emit = (p: [number, number], q: [number, number]) => {
        segments.push({ x1: p[0], y1: p[1], x2: q[0], y2: q[1] });
      };

      switch (code) {
        case 1:
        case 14:
          emit(lft(), bot());
          break;
        case 2:
        case 13:
          emit(bot(), rgt());
          break;
        case 3:
        case 12:
          emit(lft(), rgt());
          break;
        case 4:
        case 11:
          emit(rgt(), top());
          break;
        case 6:
        case 9:
          emit(bot(), top());
          break;
        case 7:
        case 8:
          emit(lft(), top());
          break;
        case 5: // saddle: corners a and c inside
          if ((a + b + c + d) / 4 >= level) {
            emit(lft(), top());
            emit(bot(), rgt());
          } else {
            emit(lft(), bot());
            emit(rgt(), top());
          }
          break;
        case 10: // saddle: corners b and d inside
          if ((a + b + c + d) / 4 >= level) {
            emit(lft(), bot());
            emit(rgt(), top());
          } else {
            emit(lft(), top());
            emit(bot(), rgt());
          }
          break;
      }
    }
  }
  return segments;
}

/**
 * Fraction of total mass in cells at or above the given level; used to
 * sanity-check massLevels and handy for tests.
 */
export function enclosedMass(field: Field, level: number): number {
  let acc = 0;
  let total = 0;
  for (const v of field.values) {
    total += v;
    if (v >= level) acc += v;
  }
  return acc / total;
}

/** Grid diagonal in data units; a reasonable tolerance scale for tests. */
export function gridDiagonal(field: Field): number {
  const [h1, h2] = cellSize(field.geom);
  return Math.hypot(h1, h2);
}
