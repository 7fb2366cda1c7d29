import { describe, expect, it } from "vitest";

import { decodePng, encodePng } from "../src/png.js";

describe("png", () => {
  it("round-trips pixels and text chunks", () => {
    const w = 13;
    const h = 7;
    const rgba = new Uint8Array(w * h * 4);
    for (let i = 0; i < rgba.length; i++) rgba[i] = (i * 37) % 256;
    const meta = { "bosewells-data": JSON.stringify({ a: [1, 2, 3] }) };
    const buf = encodePng(w, h, rgba, meta);
    // PNG signature
    expect([...buf.subarray(0, 4)]).toEqual([0x89, 0x50, 0x4e, 0x47]);
    const decoded = decodePng(buf);
    expect(decoded.width).toBe(w);
    expect(decoded.height).toBe(h);
    expect([...decoded.rgba]).toEqual([...rgba]);
    expect(decoded.text["bosewells-data"]).toBe(meta["bosewells-data"]);
  });

  it("rejects garbage", () => {
    expect(() => decodePng(Buffer.from("not a png at all"))).toThrow(/not a PNG/);
  });
});
