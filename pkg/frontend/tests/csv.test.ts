import { describe, expect, it } from "vitest";

import { columnIndex, numericColumn, parseCsv } from "../src/csv.js";

describe("parseCsv", () => {
  it("splits header and rows, tolerating a trailing newline", () => {
    const t = parseCsv("a,b\n1,2\n3,4\n");
    expect(t.header).toEqual(["a", "b"]);
    expect(t.rows).toEqual([
      ["1", "2"],
      ["3", "4"],
    ]);
  });

  it("keeps non-numeric cells as strings", () => {
    const t = parseCsv("gamma,status,kl\n0,ok,0.9\n2,divergence,\n");
    expect(t.rows[1][1]).toBe("divergence");
    expect(t.rows[1][2]).toBe("");
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1\n")).toThrow(/row 2/);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(/empty/);
  });
});

describe("numericColumn", () => {
  it("parses scientific notation", () => {
    const t = parseCsv("x,y\n1e-3,2\n-2.5E+1,3\n");
    const x = numericColumn(t, "x");
    expect(Array.from(x)).toEqual([0.001, -25]);
  });

  it("names the offending row on a parse failure", () => {
    const t = parseCsv("x\n1\noops\n");
    expect(() => numericColumn(t, "x")).toThrow(/row 3/);
  });

  it("lists available columns when the name is missing", () => {
    const t = parseCsv("a,b\n1,2\n");
    expect(() => columnIndex(t, "c")).toThrow(/have: a, b/);
  });
});
