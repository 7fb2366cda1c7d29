/** Perceptually ordered colormap (viridis-like anchor interpolation). */

const ANCHORS: [number, number, number][] = [
  [68, 1, 84],
  [72, 40, 120],
  [62, 74, 137],
  [49, 104, 142],
  [38, 130, 142],
  [31, 158, 137],
  [53, 183, 121],
  [109, 205, 89],
  [180, 222, 44],
  [253, 231, 37],
];

export function colormap(v: number): [number, number, number] {
  const t = Math.min(1, Math.max(0, v)) * (ANCHORS.length - 1);
  const i = Math.min(ANCHORS.length - 2, Math.floor(t));
  const f = t - i;
  const a = ANCHORS[i];
  const b = ANCHORS[i + 1];
  return [
    Math.round(a[0] + (b[0] - a[0]) * f),
    Math.round(a[1] + (b[1] - a[1]) * f),
    Math.round(a[2] + (b[2] - a[2]) * f),
  ];
}
