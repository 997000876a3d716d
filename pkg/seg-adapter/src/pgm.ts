/** Binary PGM (P5) encoding in the mask convention: 1 -> 255, 0 -> 0. */

export function encodePgm(width: number, height: number, binary: Uint8Array): Buffer {
  if (binary.length !== width * height) {
    throw new Error(`mask payload is ${binary.length} bytes, expected ${width * height}`);
  }
  const header = Buffer.from(`P5\n${width} ${height}\n255\n`, "ascii");
  const payload = Buffer.alloc(width * height);
  for (let i = 0; i < binary.length; i++) payload[i] = binary[i] ? 255 : 0;
  return Buffer.concat([header, payload]);
}

export interface PgmMask {
  width: number;
  height: number;
  /** 0/1 per pixel. */
  pixels: Uint8Array;
}

/** Minimal P5 reader used by the tests to verify the emitted format. */
export function decodePgm(buf: Buffer): PgmMask {
  const text = buf.subarray(0, 64).toString("ascii");
  const match = /^P5\s+(\d+)\s+(\d+)\s+(\d+)\s/.exec(text);
  if (!match) throw new Error("not a binary PGM");
  const [width, height, maxval] = [1, 2, 3].map((i) => parseInt(match[i], 10));
  if (maxval !== 255) throw new Error(`unexpected maxval ${maxval}`);
  const headerLen = match[0].length;
  const payload = buf.subarray(headerLen, headerLen + width * height);
  if (payload.length < width * height) throw new Error("truncated PGM payload");
  const pixels = new Uint8Array(width * height);
  for (let i = 0; i < pixels.length; i++) pixels[i] = payload[i] >= 128 ? 1 : 0;
  return { width, height, pixels };
}
