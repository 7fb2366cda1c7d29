/** Linear axis scales and tick placement. */

export interface Scale {
  domain: [number, number];
  range: [number, number];
  map(v: number): number;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    d0 -= 1;
    d1 += 1;
  }
  const k = (range[1] - range[0]) / (d1 - d0);
  return {
    domain: [d0, d1],
    range,
    map: (v: number) => range[0] + (v - d0) * k,
  };
}

/** Round tick positions covering the domain, about `count` of them. */
export function ticks(domain: [number, number], count = 6): number[] {
  const [d0, d1] = domain;
  if (!(d1 > d0)) return [d0];
  const span = d1 - d0;
  const step0 = Math.pow(10, Math.floor(Math.log10(span / count)));
  let best = step0;
  for (const m of [1, 2, 5, 10]) {
    if (span / (step0 * m) >= count - 2) best = step0 * m;
  }
  const start = Math.ceil(d0 / best) * best;
  const out: number[] = [];
  for (let v = start; v <= d1 + 1e-12 * span; v += best) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

export function tickLabel(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(1).replace("e+", "e");
  }
  const s = v.toPrecision(4);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo > hi) return [0, 1];
  return [lo, hi];
}

export function padded(e: [number, number], frac = 0.05): [number, number] {
  const pad = (e[1] - e[0]) * frac || 1;
  return [e[0] - pad, e[1] + pad];
}
