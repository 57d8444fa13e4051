import { describe, expect, it } from "vitest";

import {
  GridGeom,
  cellSize,
  centers,
  emptyField,
  fieldFromCells,
  fieldMax,
  fieldSum,
  histogram,
  sameGeom,
} from "../src/grid.js";

const GEOM: GridGeom = { lower: [-2, -4], upper: [4, 4], bins: [6, 8] };

describe("geometry", () => {
  it("computes cell sizes and centers", () => {
    expect(cellSize(GEOM)).toEqual([1, 1]);
    const c1 = centers(GEOM, 0);
    expect(c1[0]).toBeCloseTo(-1.5, 12);
    expect(c1[5]).toBeCloseTo(3.5, 12);
    expect(centers(GEOM, 1)).toHaveLength(8);
  });

  it("rejects degenerate grids", () => {
    expect(() => emptyField({ lower: [0, 0], upper: [0, 1], bins: [2, 2] })).toThrow(/axis 0/);
    expect(() => emptyField({ lower: [0, 0], upper: [1, 1], bins: [1, 2] })).toThrow(/bins/);
  });

  it("compares geometries exactly", () => {
    expect(sameGeom(GEOM, { ...GEOM })).toBe(true);
    expect(sameGeom(GEOM, { ...GEOM, bins: [6, 9] })).toBe(false);
  });
});

describe("histogram", () => {
  it("places points in the right cells", () => {
    const f = histogram(GEOM, new Float64Array([-1.5, -1.5, 3.9]), new Float64Array([-3.5, -3.5, 3.9]));
    expect(f.values[0 * 8 + 0]).toBe(2); // cell (0, 0)
    expect(f.values[5 * 8 + 7]).toBe(1); // cell (5, 7)
    expect(fieldSum(f)).toBe(3);
  });

  it("counts the upper boundary into the last cell and ignores outsiders", () => {
    const f = histogram(GEOM, new Float64Array([4.0, 4.1, -2.1]), new Float64Array([4.0, 0.0, 0.0]));
    expect(f.values[5 * 8 + 7]).toBe(1);
    expect(fieldSum(f)).toBe(1);
  });

  it("rejects mismatched coordinate lengths", () => {
    expect(() => histogram(GEOM, new Float64Array(2), new Float64Array(3))).toThrow(/equal length/);
  });
});

describe("fieldFromCells", () => {
  function cellRows(values: (i: number, j: number) => number) {
    const c1 = centers(GEOM, 0);
    const c2 = centers(GEOM, 1);
    const t1: number[] = [];
    const t2: number[] = [];
    const v: number[] = [];
    // deliberately theta2-major, the opposite of the storage order
    for (let j = 0; j < GEOM.bins[1]; j++) {
      for (let i = 0; i < GEOM.bins[0]; i++) {
        t1.push(c1[i]);
        t2.push(c2[j]);
        v.push(values(i, j));
      }
    }
    return { t1: new Float64Array(t1), t2: new Float64Array(t2), v: new Float64Array(v) };
  }

  it("rebuilds the field regardless of row order", () => {
    const { t1, t2, v } = cellRows((i, j) => i * 100 + j);
    const f = fieldFromCells(GEOM, t1, t2, v);
    expect(f.values[3 * 8 + 5]).toBe(305);
    expect(fieldMax(f)).toBe(507);
  });

  it("rejects coordinates that are not cell centers", () => {
    const { t1, t2, v } = cellRows(() => 1);
    t1[0] += 0.4; // more than a quarter cell off
    expect(() => fieldFromCells(GEOM, t1, t2, v)).toThrow(/not a cell center/);
  });

  it("rejects a row count that does not match the grid", () => {
    expect(() =>
      fieldFromCells(GEOM, new Float64Array([0]), new Float64Array([0]), new Float64Array([1]))
    ).toThrow(/expected 48 cells/);
  });
});
