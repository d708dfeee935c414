/**
 * Minimal decoder for the 8-bit grayscale PNGs the audit harness emits.
 *
 * Supports color type 0 (grayscale), bit depth 8, no interlacing, all
 * five scanline filters. Anything else is rejected with a clear error
 * rather than silently misread.
 */

import { inflateSync } from "node:zlib";

const SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major pixel values, 0..255. */
  pixels: Uint8Array;
}

export function decodeGrayPng(data: Buffer): GrayImage {
  if (data.length < 8 || !data.subarray(0, 8).equals(SIGNATURE)) {
    throw new Error("not a PNG file");
  }
  let width = 0;
  let height = 0;
  let sawHeader = false;
  const idat: Buffer[] = [];
  let offset = 8;
  while (offset + 8 <= data.length) {
    const length = data.readUInt32BE(offset);
    const type = data.toString("ascii", offset + 4, offset + 8);
    const body = data.subarray(offset + 8, offset + 8 + length);
    if (type === "IHDR") {
      width = body.readUInt32BE(0);
      height = body.readUInt32BE(4);
      const bitDepth = body[8];
      const colorType = body[9];
      const interlace = body[12];
      if (bitDepth !== 8 || colorType !== 0) {
        throw new Error(
          `unsupported PNG: bit depth ${bitDepth}, color type ${colorType}`,
        );
      }
      if (interlace !== 0) {
        throw new Error("interlaced PNG not supported");
      }
      sawHeader = true;
    } else if (type === "IDAT") {
      idat.push(body);
    } else if (type === "IEND") {
      break;
    }
    offset += 12 + length; // length + type + body + crc
  }
  if (!sawHeader || idat.length === 0) {
    throw new Error("PNG missing IHDR or IDAT");
  }
  const raw = inflateSync(Buffer.concat(idat));
  return { width, height, pixels: unfilter(raw, width, height) };
}

function unfilter(raw: Buffer, width: number, height: number): Uint8Array {
  const stride = width + 1; // one filter byte per scanline
  if (raw.length < stride * height) {
    throw new Error("truncated PNG pixel data");
  }
  const out = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * stride];
    const row = raw.subarray(y * stride + 1, y * stride + 1 + width);
    const cur = out.subarray(y * width, (y + 1) * width);
    const prev = y > 0 ? out.subarray((y - 1) * width, y * width) : null;
    for (let x = 0; x < width; x++) {
      const a = x > 0 ? cur[x - 1] : 0; // left
      const b = prev ? prev[x] : 0; // up
      const c = x > 0 && prev ? prev[x - 1] : 0; // upper-left
      let value: number;
      switch (filter) {
        case 0:
          value = row[x];
          break;
        case 1:
          value = row[x] + a;
          break;
        case 2:
          value = row[x] + b;
          break;
        case 3:
          value = row[x] + ((a + b) >> 1);
          break;
        case 4:
          value = row[x] + paeth(a, b, c);
          break;
        default:
          throw new Error(`unknown PNG filter type ${filter}`);
      }
      cur[x] = value & 0xff;
    }
  }
  return out;
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

export function meanIntensity(image: GrayImage): number {
  let total = 0;
  for (const v of image.pixels) total += v;
  return total / (image.pixels.length * 255);
}
