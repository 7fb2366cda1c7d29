/** Minimal PNG writer/reader: 8-bit RGBA, zlib IDAT, tEXt metadata.
 *
 * The renderer embeds the plotted data as a JSON tEXt chunk so the
 * figure can be turned back into the numbers it shows (`extract`).
 */

import { deflateSync, inflateSync } from "node:zlib";

const SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(buf: Buffer): number {
  let c = 0xffffffff;
  for (let i = 0; i < buf.length; i++) {
    c = CRC_TABLE[(c ^ buf[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Buffer): Buffer {
  const head = Buffer.alloc(4);
  head.writeUInt32BE(data.length);
  const body = Buffer.concat([Buffer.from(type, "latin1"), data]);
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(body));
  return Buffer.concat([head, body, crc]);
}

export function encodePng(
  width: number,
  height: number,
  rgba: Uint8Array | Uint8ClampedArray,
  text: Record<string, string> = {},
): Buffer {
  if (rgba.length !== width * height * 4) {
    throw new Error(`pixel buffer is ${rgba.length}, want ${width * height * 4}`);
  }
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 6; // RGBA
  // filter type 0 per scanline
  const raw = Buffer.alloc(height * (1 + width * 4));
  for (let y = 0; y < height; y++) {
    const o = y * (1 + width * 4);
    raw[o] = 0;
    raw.set(rgba.subarray(y * width * 4, (y + 1) * width * 4), o + 1);
  }
  const chunks = [SIGNATURE, chunk("IHDR", ihdr)];
  for (const [key, value] of Object.entries(text)) {
    // tEXt is latin-1; JSON payloads are escaped to ASCII by the caller
    chunks.push(
      chunk(
        "tEXt",
        Buffer.concat([
          Buffer.from(key, "latin1"),
          Buffer.from([0]),
          Buffer.from(value, "latin1"),
        ]),
      ),
    );
  }
  chunks.push(chunk("IDAT", deflateSync(raw, { level: 9 })));
  chunks.push(chunk("IEND", Buffer.alloc(0)));
  return Buffer.concat(chunks);
}

export interface DecodedPng {
  width: number;
  height: number;
  rgba: Uint8Array;
  text: Record<string, string>;
}

export function decodePng(buf: Buffer): DecodedPng {
  if (!buf.subarray(0, 8).equals(SIGNATURE)) {
    throw new Error("not a PNG file");
  }
  let pos = 8;
  let width = 0;
  let height = 0;
  const text: Record<string, string> = {};
  const idat: Buffer[] = [];
  while (pos < buf.length) {
    const len = buf.readUInt32BE(pos);
    const type = buf.toString("latin1", pos + 4, pos + 8);
    const data = buf.subarray(pos + 8, pos + 8 + len);
    if (type === "IHDR") {
      width = data.readUInt32BE(0);
      height = data.readUInt32BE(4);
      if (data[8] !== 8 || data[9] !== 6) {
        throw new Error("only 8-bit RGBA PNGs are supported");
      }
    } else if (type === "tEXt") {
      const zero = data.indexOf(0);
      text[data.toString("latin1", 0, zero)] = data.toString(
        "latin1",
        zero + 1,
      );
    } else if (type === "IDAT") {
      idat.push(Buffer.from(data));
    }
    pos += 12 + len;
  }
  const raw = inflateSync(Buffer.concat(idat));
  const rgba = new Uint8Array(width * height * 4);
  for (let y = 0; y < height; y++) {
    const o = y * (1 + width * 4);
    if (raw[o] !== 0) {
      throw new Error("only filter type 0 is supported");
    }
    rgba.set(raw.subarray(o + 1, o + 1 + width * 4), y * width * 4);
  }
  return { width, height, rgba, text };
}
