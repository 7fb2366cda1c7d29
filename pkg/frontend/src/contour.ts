/** Marching-squares contour segments of a scalar field on a regular grid. */

export interface Segment {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

/**
 * Contour `field[i][j]` (i indexes xs, j indexes ys) at `level`.
 * Returned coordinates are in data units.
 */
export function contourSegments(
  xs: number[],
  ys: number[],
  field: number[][],
  level: number,
): Segment[] {
  const segments: Segment[] = [];
  const interp = (a: number, b: number, va: number, vb: number) =>
    a + ((level - va) / (vb - va)) * (b - a);
  for (let i = 0; i < xs.length - 1; i++) {
    for (let j = 0; j < ys.length - 1; j++) {
      const v00 = field[i][j];
      const v10 = field[i + 1][j];
      const v01 = field[i][j + 1];
      const v11 = field[i + 1][j + 1];
      let mask = 0;
      if (v00 > level) mask |= 1;
      if (v10 > level) mask |= 2;
      if (v11 > level) mask |= 4;
      if (v01 > level) mask |= 8;
      if (mask === 0 || mask === 15) continue;
      // edge midpoints by linear interpolation
      const bottom = () => [interp(xs[i], xs[i + 1], v00, v10), ys[j]];
      const top = () => [interp(xs[i], xs[i + 1], v01, v11), ys[j + 1]];
      const left = () => [xs[i], interp(ys[j], ys[j + 1], v00, v01)];
      const right = () => [xs[i + 1], interp(ys[j], ys[j + 1], v10, v11)];
      const put = (a: number[], b: number[]) =>
        segments.push({ x0: a[0], y0: a[1], x1: b[0], y1: b[1] });
      switch (mask) {
        case 1: case 14: put(left(), bottom()); break;
        case 2: case 13: put(bottom(), right()); break;
        case 3: case 12: put(left(), right()); break;
        case 4: case 11: put(right(), top()); break;
        case 6: case 9: put(bottom(), top()); break;
        case 7: case 8: put(left(), top()); break;
        case 5:
          put(left(), bottom());
          put(right(), top());
          break;
        case 10:
          put(bottom(), right());
          put(left(), top());
          break;
      }
    }
  }
  return segments;
}
