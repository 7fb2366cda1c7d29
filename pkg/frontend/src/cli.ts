/** bosewells-plots: render figures from bosewells CSV outputs.
 *
 *   render --kind timeseries|heatmap|phasespace --in a.csv [b.csv ...]
 *          --out fig.png [--title T] [--time-axis raw|plasma]
 *          [--column NAME]
 *   extract --in fig.png [--out data.csv]
 *
 * Rendered PNGs embed exactly the plotted numbers as a tEXt JSON chunk
 * ("bosewells-data"); `extract` turns a figure back into CSV.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";

import { column, formatG17, hasColumn, parseCsv, SchemaError, toCsv, type Table } from "./csv.js";
import { decodePng, encodePng } from "./png.js";
import {
  renderHeatmap,
  renderPhasespace,
  renderTimeseries,
  type HeatmapPanel,
  type Rendered,
  type Series,
} from "./plots.js";

interface Args {
  command: string;
  kind?: string;
  inputs: string[];
  out?: string;
  title?: string;
  timeAxis: string;
  column?: string;
}

export function parseArgs(argv: string[]): Args {
  const args: Args = { command: argv[0] ?? "", inputs: [], timeAxis: "raw" };
  for (let i = 1; i < argv.length; i++) {
    const a = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new SchemaError(`missing value after ${a}`);
      return argv[++i];
    };
    if (a === "--kind") args.kind = next();
    else if (a === "--in") args.inputs.push(next());
    else if (a === "--out") args.out = next();
    else if (a === "--title") args.title = next();
    else if (a === "--time-axis") args.timeAxis = next();
    else if (a === "--column") args.column = next();
    else if (!a.startsWith("--")) args.inputs.push(a);
    else throw new SchemaError(`unknown option ${a}`);
  }
  return args;
}

function timeColumn(table: Table, axis: string, source: string): number[] {
  if (axis === "plasma" && hasColumn(table, "t_plasma_periods")) {
    return column(table, "t_plasma_periods", source);
  }
  return column(table, "t", source);
}

const NON_SERIES = new Set(["t", "t_plasma_periods", "stderr", "alive_count",
  "raw_norm", "filtered_fraction"]);

function loadTimeseries(args: Args): Series[] {
  const series: Series[] = [];
  for (const path of args.inputs) {
    const table = parseCsv(readFileSync(path, "utf-8"), path);
    const t = timeColumn(table, args.timeAxis, path);
    const names = args.column
      ? [args.column]
      : table.header.filter((h) => !NON_SERIES.has(h));
    for (const name of names) {
      series.push({ name: seriesLabel(name, path, args.inputs.length > 1),
        t, y: column(table, name, path) });
    }
  }
  return series;
}

function seriesLabel(columnName: string, path: string, multi: boolean): string {
  if (["exact", "classical", "twa", "hk"].includes(columnName)) return columnName;
  if (multi) {
    const stem = basename(path).replace(/\.csv$/, "");
    return stem;
  }
  return columnName;
}

function pivotWavefunction(table: Table, source: string): HeatmapPanel {
  const t = column(table, "t", source);
  const xName = hasColumn(table, "j") ? "j" : "n1";
  const x = column(table, xName, source);
  const prob = column(table, "prob", source);
  const tVals = [...new Set(t)].sort((a, b) => a - b);
  const xVals = [...new Set(x)].sort((a, b) => a - b);
  const tIndex = new Map(tVals.map((v, i) => [v, i]));
  const xIndex = new Map(xVals.map((v, i) => [v, i]));
  const z: number[][] = tVals.map(() => xVals.map(() => 0));
  for (let r = 0; r < t.length; r++) {
    z[tIndex.get(t[r])!][xIndex.get(x[r])!] += prob[r];
  }
  return { name: basename(source).replace(/\.csv$/, ""), t: tVals, x: xVals, z };
}

function loadPhasespace(path: string) {
  const table = parseCsv(readFileSync(path, "utf-8"), path);
  const phi = column(table, "phi", path);
  const j = column(table, "j", path);
  const w = column(table, "w", path);
  const h = column(table, "h", path);
  const phiVals = [...new Set(phi)].sort((a, b) => a - b);
  const jVals = [...new Set(j)].sort((a, b) => a - b);
  const pIndex = new Map(phiVals.map((v, i) => [v, i]));
  const jIndex = new Map(jVals.map((v, i) => [v, i]));
  const wg: number[][] = phiVals.map(() => jVals.map(() => 0));
  const hg: number[][] = phiVals.map(() => jVals.map(() => 0));
  for (let r = 0; r < phi.length; r++) {
    wg[pIndex.get(phi[r])!][jIndex.get(j[r])!] = w[r];
    hg[pIndex.get(phi[r])!][jIndex.get(j[r])!] = h[r];
  }
  return { phi: phiVals, j: jVals, w: wg, h: hg };
}

function runRender(args: Args): void {
  if (!args.kind) throw new SchemaError("--kind is required");
  if (args.inputs.length === 0) throw new SchemaError("--in is required");
  if (!args.out) throw new SchemaError("--out is required");
  let rendered: Rendered;
  if (args.kind === "timeseries") {
    rendered = renderTimeseries(loadTimeseries(args), {
      title: args.title,
      xlabel: args.timeAxis === "plasma" ? "t (plasma periods)" : "t",
    });
  } else if (args.kind === "heatmap") {
    const panels = args.inputs.map((p) =>
      pivotWavefunction(parseCsv(readFileSync(p, "utf-8"), p), p));
    rendered = renderHeatmap(panels, { title: args.title, ylabel: "j" });
  } else if (args.kind === "phasespace") {
    rendered = renderPhasespace(loadPhasespace(args.inputs[0]),
      { title: args.title });
  } else {
    throw new SchemaError(`unknown kind '${args.kind}'`);
  }
  const png = encodePng(
    rendered.raster.width,
    rendered.raster.height,
    rendered.raster.data,
    { "bosewells-data": JSON.stringify(rendered.embedded) },
  );
  writeFileSync(args.out, png);
  console.log(`wrote ${args.out} (${png.length} bytes)`);
}

/** Re-emit the embedded data of a rendered figure as CSV text. */
export function extractCsv(embedded: any): string {
  if (embedded.kind === "timeseries") {
    const series: { name: string; t: number[]; y: number[] }[] = embedded.series;
    const header = ["t", ...series.map((s) => s.name)];
    const t = series.length ? series[0].t : [];
    const columns = [t, ...series.map((s) => s.y)];
    return toCsv({ header, columns });
  }
  if (embedded.kind === "heatmap") {
    const lines = ["panel,t,x,z"];
    for (const p of embedded.panels) {
      for (let it = 0; it < p.t.length; it++) {
        for (let ix = 0; ix < p.x.length; ix++) {
          lines.push(
            `${p.name},${formatG17(p.t[it])},${formatG17(p.x[ix])},${formatG17(p.z[it][ix])}`);
        }
      }
    }
    return lines.join("\n") + "\n";
  }
  if (embedded.kind === "phasespace") {
    const lines = ["phi,j,w,h"];
    for (let i = 0; i < embedded.phi.length; i++) {
      for (let k = 0; k < embedded.j.length; k++) {
        lines.push(
          `${formatG17(embedded.phi[i])},${formatG17(embedded.j[k])},` +
          `${formatG17(embedded.w[i][k])},${formatG17(embedded.h[i][k])}`);
      }
    }
    return lines.join("\n") + "\n";
  }
  throw new SchemaError(`unknown embedded kind '${embedded.kind}'`);
}

function runExtract(args: Args): void {
  if (args.inputs.length !== 1) throw new SchemaError("extract needs one --in PNG");
  const png = decodePng(readFileSync(args.inputs[0]));
  const payload = png.text["bosewells-data"];
  if (!payload) throw new SchemaError("no embedded bosewells-data chunk");
  const csv = extractCsv(JSON.parse(payload));
  if (args.out) {
    writeFileSync(args.out, csv);
    console.log(`wrote ${args.out}`);
  } else {
    process.stdout.write(csv);
  }
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    if (args.command === "render") runRender(args);
    else if (args.command === "extract") runExtract(args);
    else {
      console.error(
        "usage: bosewells-plots render --kind K --in CSV [--in CSV] --out PNG\n" +
        "       bosewells-plots extract --in PNG [--out CSV]");
      return args.command ? 2 : 0;
    }
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

const isMain = process.argv[1] && import.meta.url.endsWith(basename(process.argv[1]));
if (isMain) {
  process.exit(main(process.argv.slice(2)));
}
