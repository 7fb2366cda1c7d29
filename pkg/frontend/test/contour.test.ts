import { describe, expect, it } from "vitest";

import { contourSegments } from "../src/contour.js";

describe("marching squares", () => {
  it("contours a paraboloid at the unit circle", () => {
    const n = 81;
    const xs = Array.from({ length: n }, (_, i) => -2 + (4 * i) / (n - 1));
    const ys = xs.slice();
    const field = xs.map((x) => ys.map((y) => x * x + y * y));
    const segments = contourSegments(xs, ys, field, 1.0);
    expect(segments.length).toBeGreaterThan(40);
    for (const s of segments) {
      for (const [x, y] of [[s.x0, s.y0], [s.x1, s.y1]] as const) {
        expect(Math.hypot(x, y)).toBeCloseTo(1.0, 2);
      }
    }
  });

  it("returns nothing for a level outside the range", () => {
    const xs = [0, 1];
    const ys = [0, 1];
    expect(contourSegments(xs, ys, [[0, 0], [0, 0]], 5)).toEqual([]);
  });
});
