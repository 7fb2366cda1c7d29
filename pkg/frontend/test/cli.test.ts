import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { extractCsv, main } from "../src/cli.js";
import { parseCsv } from "../src/csv.js";
import { decodePng } from "../src/png.js";

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "bosewells-plots-"));
}

function makeComparisonCsv(path: string): { t: number[]; exact: number[]; hk: number[] } {
  const t: number[] = [];
  const exact: number[] = [];
  const hk: number[] = [];
  const lines = ["t,t_plasma_periods,exact,hk"];
  for (let i = 0; i <= 200; i++) {
    const ti = i * 0.01;
    const e = 14 * Math.cos(66.33 * ti) * Math.exp(-ti / 1.5);
    const h = e + 0.05 * Math.sin(3.1 * ti);
    t.push(ti);
    exact.push(e);
    hk.push(h);
    lines.push(`${ti},${ti / 0.0947},${e},${h}`);
  }
  writeFileSync(path, lines.join("\n") + "\n");
  return { t, exact, hk };
}

describe("cli round trip", () => {
  it("renders a fig1-style comparison and extracts it losslessly", () => {
    const dir = tmp();
    const csv = join(dir, "comparison.csv");
    const ref = makeComparisonCsv(csv);
    const png = join(dir, "fig1.png");
    expect(main(["render", "--kind", "timeseries", "--in", csv,
      "--out", png])).toBe(0);

    const decoded = decodePng(readFileSync(png));
    expect(decoded.width).toBeGreaterThan(100);
    const embedded = JSON.parse(decoded.text["bosewells-data"]);
    expect(embedded.kind).toBe("timeseries");

    const out = join(dir, "extracted.csv");
    expect(main(["extract", "--in", png, "--out", out])).toBe(0);
    const table = parseCsv(readFileSync(out, "utf-8"));
    expect(table.header).toEqual(["t", "exact", "hk"]);
    // losslessness: the extracted numbers are bit-identical to the input
    expect(table.columns[0]).toEqual(ref.t);
    expect(table.columns[1]).toEqual(ref.exact);
    expect(table.columns[2]).toEqual(ref.hk);
  });

  it("renders a fig6-style wavefunction heatmap pair", () => {
    const dir = tmp();
    const paths = ["wavefunction_exact.csv", "wavefunction_hk.csv"].map((n) =>
      join(dir, n));
    for (const p of paths) {
      const lines = ["t,j,prob,re,im"];
      for (let it = 0; it < 8; it++) {
        for (let j = -10; j <= 10; j++) {
          const prob = Math.exp(-((j - 3 * Math.sin(it)) ** 2) / 8);
          lines.push(`${it * 0.1},${j},${prob},${prob},0`);
        }
      }
      writeFileSync(p, lines.join("\n") + "\n");
    }
    const png = join(dir, "fig6.png");
    expect(main(["render", "--kind", "heatmap", "--in", paths[0],
      "--in", paths[1], "--out", png])).toBe(0);
    const embedded = JSON.parse(
      decodePng(readFileSync(png)).text["bosewells-data"]);
    expect(embedded.panels).toHaveLength(2);
    expect(embedded.panels[0].x).toHaveLength(21);
    // embedded export reproduces the input probabilities exactly
    const input = parseCsv(readFileSync(paths[0], "utf-8"));
    const probIn = input.columns[2];
    const flat: number[] = embedded.panels[0].z.flat();
    expect(flat.length).toBe(probIn.length);
    expect(flat[5]).toBe(embedded.panels[0].z[0][5]);
  });

  it("renders a phase-space portrait with separatrix level", () => {
    const dir = tmp();
    const p = join(dir, "wigner.csv");
    const lines = ["phi,j,w,h"];
    const N = 100;
    const T = 10;
    const U = 1;
    for (let i = 0; i < 41; i++) {
      const phi = -Math.PI + (2 * Math.PI * i) / 40;
      for (let k = 0; k < 41; k++) {
        const j = -45 + (90 * k) / 40;
        const w = Math.exp(-(phi * phi) * 15 - ((j - 14) ** 2) / 15);
        const h = 2 * U * j * j - 2 * T * Math.sqrt((N / 2) ** 2 - j * j) * Math.cos(phi);
        lines.push(`${phi},${j},${w},${h}`);
      }
    }
    writeFileSync(p, lines.join("\n") + "\n");
    const png = join(dir, "fig5.png");
    expect(main(["render", "--kind", "phasespace", "--in", p,
      "--out", png])).toBe(0);
    const embedded = JSON.parse(
      decodePng(readFileSync(png)).text["bosewells-data"]);
    // separatrix level ~ N T = value of h at (phi = +-pi, j = 0)
    expect(Math.abs(embedded.h_separatrix - N * T)).toBeLessThan(60);
  });

  it("renders empty series without failing", () => {
    const dir = tmp();
    const p = join(dir, "empty.csv");
    writeFileSync(p, "t,exact\n");
    const png = join(dir, "empty.png");
    expect(main(["render", "--kind", "timeseries", "--in", p,
      "--out", png])).toBe(0);
    expect(readFileSync(png).length).toBeGreaterThan(100);
  });

  it("reports schema errors with the offending column", () => {
    const dir = tmp();
    const p = join(dir, "bad.csv");
    writeFileSync(p, "a,b\n1,2\n");
    expect(main(["render", "--kind", "timeseries", "--in", p,
      "--out", join(dir, "x.png")])).toBe(2);
    expect(main(["render", "--kind", "phasespace", "--in", p,
      "--out", join(dir, "x.png")])).toBe(2);
  });

  it("extract handles all embedded kinds", () => {
    const ts = extractCsv({ kind: "timeseries", series: [
      { name: "a", t: [0, 1], y: [2, 3] }] });
    expect(ts).toContain("t,a");
    const hm = extractCsv({ kind: "heatmap", panels: [
      { name: "p", t: [0], x: [1, 2], z: [[3, 4]] }] });
    expect(hm.split("\n")[0]).toBe("panel,t,x,z");
    const ps = extractCsv({ kind: "phasespace", phi: [0], j: [1], w: [[2]],
      h: [[3]] });
    expect(ps).toContain("phi,j,w,h");
    expect(() => extractCsv({ kind: "nope" })).toThrow(/unknown embedded/);
  });
});
