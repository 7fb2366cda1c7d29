import { describe, expect, it } from "vitest";

import { column, formatG17, parseCsv, SchemaError, toCsv } from "../src/csv.js";

describe("csv", () => {
  it("parses a simple table", () => {
    const t = parseCsv("t,y\n0,1.5\n1,2.5\n");
    expect(t.header).toEqual(["t", "y"]);
    expect(column(t, "y")).toEqual([1.5, 2.5]);
  });

  it("round-trips full float precision", () => {
    const values = [
      Math.PI, 1 / 3, 6.02214076e23, -1.2345678901234567e-8, 14.003838499760164,
    ];
    for (const v of values) {
      expect(Number(formatG17(v))).toBe(v);
    }
    const table = { header: ["a"], columns: [values] };
    const back = parseCsv(toCsv(table));
    expect(back.columns[0]).toEqual(values);
  });

  it("names the offending column on schema mismatch", () => {
    const t = parseCsv("t,y\n0,1\n");
    expect(() => column(t, "prob", "file.csv")).toThrow(/prob/);
    expect(() => column(t, "prob", "file.csv")).toThrow(SchemaError);
  });

  it("rejects non-numeric cells with location", () => {
    expect(() => parseCsv("t,y\n0,hello\n", "f.csv")).toThrow(/f.csv:2.*'y'/);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("t,y\n0\n")).toThrow(/1 fields, expected 2/);
  });
});
