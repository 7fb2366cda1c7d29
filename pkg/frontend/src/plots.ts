/** Figure renderers: time-series overlays, wavefunction heatmaps and
 * phase-space portraits, drawn onto the software raster at a fixed
 * size so identical inputs give identical images.
 */

import { colormap } from "./colormap.js";
import { contourSegments } from "./contour.js";
import { Raster, type Color } from "./raster.js";
import { extent, linearScale, padded, tickLabel, ticks, type Scale } from "./scales.js";

export const WIDTH = 900;
export const HEIGHT = 560;

const SERIES_STYLE: Record<string, { color: Color; dashed: boolean }> = {
  exact: { color: [40, 80, 200], dashed: true },
  hk: { color: [30, 150, 60], dashed: false },
  twa: { color: [200, 50, 40], dashed: false },
  classical: { color: [120, 120, 120], dashed: false },
};

const FALLBACK_COLORS: Color[] = [
  [30, 150, 60],
  [200, 50, 40],
  [40, 80, 200],
  [200, 140, 20],
  [120, 60, 160],
];

export interface Series {
  name: string;
  t: number[];
  y: number[];
}

export interface Rendered {
  raster: Raster;
  /** exactly the numbers that were drawn, for the embedded export */
  embedded: object;
}

interface Frame {
  x: Scale;
  y: Scale;
}

function drawFrame(
  r: Raster,
  xdom: [number, number],
  ydom: [number, number],
  box: [number, number, number, number],
  xlabel: string,
  ylabel: string,
  title: string,
): Frame {
  const [left, top, w, h] = box;
  const x = linearScale(xdom, [left, left + w]);
  const y = linearScale(ydom, [top + h, top]);
  r.strokeRect(left, top, w, h, [0, 0, 0]);
  for (const tv of ticks(x.domain)) {
    const px = x.map(tv);
    r.line(px, top + h, px, top + h + 5, [0, 0, 0]);
    const label = tickLabel(tv);
    r.text(px - Raster.textWidth(label) / 2, top + h + 9, label, [0, 0, 0]);
  }
  for (const tv of ticks(y.domain)) {
    const py = y.map(tv);
    r.line(left - 5, py, left, py, [0, 0, 0]);
    const label = tickLabel(tv);
    r.text(left - 8 - Raster.textWidth(label), py - 3, label, [0, 0, 0]);
  }
  if (xlabel) {
    r.text(left + w / 2 - Raster.textWidth(xlabel) / 2, top + h + 26, xlabel,
      [0, 0, 0]);
  }
  if (ylabel) {
    r.text(left, top - 14, ylabel, [0, 0, 0]);
  }
  if (title) {
    r.text(
      left + w / 2 - Raster.textWidth(title, 2) / 2, 8, title, [0, 0, 0], 2);
  }
  return { x, y };
}

function styleOf(name: string, k: number) {
  return (
    SERIES_STYLE[name] ?? {
      color: FALLBACK_COLORS[k % FALLBACK_COLORS.length],
      dashed: false,
    }
  );
}

export function renderTimeseries(
  series: Series[],
  opts: { title?: string; xlabel?: string; ylabel?: string } = {},
): Rendered {
  const r = new Raster(WIDTH, HEIGHT);
  const allT = series.flatMap((s) => s.t);
  const allY = series.flatMap((s) => s.y);
  const frame = drawFrame(
    r,
    extent(allT),
    padded(extent(allY)),
    [70, 50, WIDTH - 100, HEIGHT - 120],
    opts.xlabel ?? "t",
    opts.ylabel ?? "",
    opts.title ?? "",
  );
  series.forEach((s, k) => {
    const { color, dashed } = styleOf(s.name, k);
    for (let i = 1; i < s.t.length; i++) {
      const x0 = frame.x.map(s.t[i - 1]);
      const y0 = frame.y.map(s.y[i - 1]);
      const x1 = frame.x.map(s.t[i]);
      const y1 = frame.y.map(s.y[i]);
      if (dashed && i % 2 === 0) continue;
      r.line(x0, y0, x1, y1, color, dashed ? 1 : 2);
    }
    const ly = 58 + 14 * k;
    r.line(WIDTH - 150, ly + 3, WIDTH - 120, ly + 3, color, 2);
    r.text(WIDTH - 114, ly, s.name, [0, 0, 0]);
  });
  return {
    raster: r,
    embedded: {
      kind: "timeseries",
      series: series.map((s) => ({ name: s.name, t: s.t, y: s.y })),
    },
  };
}

export interface HeatmapPanel {
  name: string;
  t: number[];
  x: number[];
  /** z[it][ix] */
  z: number[][];
}

export function renderHeatmap(
  panels: HeatmapPanel[],
  opts: { title?: string; xlabel?: string; ylabel?: string } = {},
): Rendered {
  const r = new Raster(WIDTH, HEIGHT);
  const zmax = Math.max(
    1e-300,
    ...panels.flatMap((p) => p.z.flatMap((row) => row)),
  );
  const innerW = Math.floor((WIDTH - 150) / Math.max(panels.length, 1));
  panels.forEach((panel, k) => {
    const left = 70 + k * (innerW + 20);
    const frame = drawFrame(
      r,
      extent(panel.t),
      extent(panel.x),
      [left, 50, innerW, HEIGHT - 120],
      opts.xlabel ?? "t",
      k === 0 ? (opts.ylabel ?? "") : "",
      k === 0 ? (opts.title ?? "") : "",
    );
    r.text(left + 4, 40, panel.name, [0, 0, 0]);
    const nt = panel.t.length;
    const nx = panel.x.length;
    const cellW = Math.max(1, Math.ceil(innerW / Math.max(nt, 1)));
    const cellH = Math.max(1, Math.ceil((HEIGHT - 120) / Math.max(nx, 1)));
    for (let it = 0; it < nt; it++) {
      for (let ix = 0; ix < nx; ix++) {
        const [cr, cg, cb] = colormap(panel.z[it][ix] / zmax);
        const px = frame.x.map(panel.t[it]);
        const py = frame.y.map(panel.x[ix]);
        r.fillRect(px - cellW / 2, py - cellH / 2, cellW, cellH, [cr, cg, cb]);
      }
    }
    r.strokeRect(left, 50, innerW, HEIGHT - 120, [0, 0, 0]);
  });
  // colorbar
  const cbX = WIDTH - 46;
  for (let y = 0; y < HEIGHT - 120; y++) {
    const [cr, cg, cb] = colormap(1 - y / (HEIGHT - 120));
    r.fillRect(cbX, 50 + y, 16, 1, [cr, cg, cb]);
  }
  r.strokeRect(cbX, 50, 16, HEIGHT - 120, [0, 0, 0]);
  r.text(cbX - 4, 36, "max", [0, 0, 0]);
  r.text(cbX, HEIGHT - 62, "0", [0, 0, 0]);
  return {
    raster: r,
    embedded: {
      kind: "heatmap",
      panels: panels.map((p) => ({ name: p.name, t: p.t, x: p.x, z: p.z })),
    },
  };
}

export interface PhasespaceData {
  phi: number[];
  j: number[];
  /** w[iphi][ij], h[iphi][ij] */
  w: number[][];
  h: number[][];
}

export function renderPhasespace(
  data: PhasespaceData,
  opts: { title?: string } = {},
): Rendered {
  const r = new Raster(WIDTH, HEIGHT);
  const frame = drawFrame(
    r,
    extent(data.phi),
    extent(data.j),
    [70, 50, WIDTH - 150, HEIGHT - 120],
    "phi",
    "j",
    opts.title ?? "",
  );
  const wmax = Math.max(1e-300, ...data.w.flatMap((row) => row));
  const cellW = Math.max(1, Math.ceil((WIDTH - 150) / data.phi.length));
  const cellH = Math.max(1, Math.ceil((HEIGHT - 120) / data.j.length));
  for (let i = 0; i < data.phi.length; i++) {
    for (let k = 0; k < data.j.length; k++) {
      const [cr, cg, cb] = colormap(data.w[i][k] / wmax);
      r.fillRect(
        frame.x.map(data.phi[i]) - cellW / 2,
        frame.y.map(data.j[k]) - cellH / 2,
        cellW, cellH, [cr, cg, cb]);
    }
  }
  // equipotential curves of the classical energy surface
  const hflat = data.h.flatMap((row) => row);
  const hmin = Math.min(...hflat);
  const hmax = Math.max(...hflat);
  const levels: number[] = [];
  for (let k = 1; k <= 7; k++) {
    levels.push(hmin + ((hmax - hmin) * k) / 8);
  }
  for (const level of levels) {
    for (const seg of contourSegments(data.phi, data.j, data.h, level)) {
      r.line(
        frame.x.map(seg.x0), frame.y.map(seg.y0),
        frame.x.map(seg.x1), frame.y.map(seg.y1), [230, 230, 230]);
    }
  }
  // separatrix: the energy of the hyperbolic point (phi = +-pi, j ~ 0),
  // read off the sampled energy surface itself
  let iEdge = 0;
  for (let i = 0; i < data.phi.length; i++) {
    if (Math.abs(Math.abs(data.phi[i]) - Math.PI)
      < Math.abs(Math.abs(data.phi[iEdge]) - Math.PI)) iEdge = i;
  }
  let kZero = 0;
  for (let k = 0; k < data.j.length; k++) {
    if (Math.abs(data.j[k]) < Math.abs(data.j[kZero])) kZero = k;
  }
  const hsep = data.h[iEdge][kZero];
  for (const seg of contourSegments(data.phi, data.j, data.h, hsep)) {
    r.line(
      frame.x.map(seg.x0), frame.y.map(seg.y0),
      frame.x.map(seg.x1), frame.y.map(seg.y1), [255, 255, 255], 2);
  }
  r.strokeRect(70, 50, WIDTH - 150, HEIGHT - 120, [0, 0, 0]);
  return {
    raster: r,
    embedded: {
      kind: "phasespace",
      phi: data.phi,
      j: data.j,
      w: data.w,
      h: data.h,
      h_separatrix: hsep,
    },
  };
}
