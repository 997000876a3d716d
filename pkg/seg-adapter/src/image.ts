/** RGB image loading (PNG, PPM) and bilinear resizing. */

import { readFileSync } from "node:fs";
import { PNG } from "pngjs";

export interface RgbImage {
  width: number;
  height: number;
  /** Interleaved RGB, 3 bytes per pixel, row-major. */
  data: Uint8Array;
}

export class ImageDecodeError extends Error {}

function decodePng(buf: Buffer): RgbImage {
  const png = PNG.sync.read(buf);
  const data = new Uint8Array(png.width * png.height * 3);
  for (let i = 0; i < png.width * png.height; i++) {
    data[i * 3] = png.data[i * 4];
    data[i * 3 + 1] = png.data[i * 4 + 1];
    data[i * 3 + 2] = png.data[i * 4 + 2];
  }
  return { width: png.width, height: png.height, data };
}

function ppmTokens(buf: Buffer, count: number, start: number): [number[], number] {
  const tokens: number[] = [];
  let i = start;
  while (tokens.length < count) {
    while (i < buf.length && /\s/.test(String.fromCharCode(buf[i]))) i++;
    if (buf[i] === 0x23 /* # */) {
      while (i < buf.length && buf[i] !== 0x0a) i++;
      continue;
    }
    let j = i;
    while (j < buf.length && !/\s/.test(String.fromCharCode(buf[j]))) j++;
    const tok = buf.subarray(i, j).toString("ascii");
    if (!/^\d+$/.test(tok)) throw new ImageDecodeError(`bad PPM header token: ${tok}`);
    tokens.push(parseInt(tok, 10));
    i = j;
  }
  return [tokens, i];
}

function decodePpm(buf: Buffer): RgbImage {
  const magic = buf.subarray(0, 2).toString("ascii");
  const [[width, height, maxval], pos] = ppmTokens(buf, 3, 2);
  if (maxval <= 0 || maxval > 255) throw new ImageDecodeError(`unsupported PPM maxval ${maxval}`);
  const n = width * height * 3;
  const data = new Uint8Array(n);
  if (magic === "P6") {
    const payload = buf.subarray(pos + 1, pos + 1 + n);
    if (payload.length < n) throw new ImageDecodeError("truncated P6 payload");
    data.set(payload);
  } else {
    const values = buf.subarray(pos).toString("ascii").trim().split(/\s+/);
    if (values.length < n) throw new ImageDecodeError("truncated P3 payload");
    for (let i = 0; i < n; i++) data[i] = parseInt(values[i], 10);
  }
  return { width, height, data };
}

export function decodeImage(path: string): RgbImage {
  const buf = readFileSync(path);
  if (buf.length >= 8 && buf[0] === 0x89 && buf[1] === 0x50) return decodePng(buf);
  const magic = buf.subarray(0, 2).toString("ascii");
  if (magic === "P6" || magic === "P3") return decodePpm(buf);
  throw new ImageDecodeError(`unsupported image format in ${path}`);
}

/** Bilinear resample to the target size (edge-clamped). */
export function resize(img: RgbImage, width: number, height: number): RgbImage {
  if (img.width === width && img.height === height) return img;
  const out = new Uint8Array(width * height * 3);
  const sx = img.width / width;
  const sy = img.height / height;
  for (let y = 0; y < height; y++) {
    const fy = Math.min((y + 0.5) * sy - 0.5, img.height - 1);
    const y0 = Math.max(0, Math.floor(fy));
    const y1 = Math.min(img.height - 1, y0 + 1);
    const wy = Math.max(0, fy - y0);
    for (let x = 0; x < width; x++) {
      const fx = Math.min((x + 0.5) * sx - 0.5, img.width - 1);
      const x0 = Math.max(0, Math.floor(fx));
      const x1 = Math.min(img.width - 1, x0 + 1);
      const wx = Math.max(0, fx - x0);
      for (let c = 0; c < 3; c++) {
        const p00 = img.data[(y0 * img.width + x0) * 3 + c];
        const p01 = img.data[(y0 * img.width + x1) * 3 + c];
        const p10 = img.data[(y1 * img.width + x0) * 3 + c];
        const p11 = img.data[(y1 * img.width + x1) * 3 + c];
        const top = p00 + (p01 - p00) * wx;
        const bot = p10 + (p11 - p10) * wx;
        out[(y * width + x) * 3 + c] = Math.round(top + (bot - top) * wy);
      }
    }
  }
  return { width, height, data: out };
}
