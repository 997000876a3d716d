import { mkdtempSync, readFileSync, readdirSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { spawnSync } from "node:child_process";

import { describe, expect, it } from "vitest";

import { decodePgm } from "../src/pgm.js";
import { segmentBatch } from "../src/batch.js";
import { decodeImage, resize, type RgbImage } from "../src/image.js";
import { excessGreen, binarize } from "../src/segment.js";

function tmp(prefix: string): string {
  return mkdtempSync(join(tmpdir(), prefix));
}

/** Deterministic pseudo-random byte stream (LCG). */
function* lcg(seed: number): Generator<number> {
  let s = seed >>> 0;
  while (true) {
    s = (s * 1664525 + 1013904223) >>> 0;
    yield s >>> 24;
  }
}

/** Brown soil with bright-green row stripes, crop-row style. */
function fieldImage(width: number, height: number, stripes: number[], seed = 1): RgbImage {
  const data = new Uint8Array(width * height * 3);
  const noise = lcg(seed);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = (y * width + x) * 3;
      const n = (noise.next().value as number) % 24;
      data[i] = 110 + n; // soil: red-ish brown
      data[i + 1] = 80 + n;
      data[i + 2] = 52 + n;
      for (const sx of stripes) {
        // stripes lean slightly so detection has a line to follow
        const cx = sx + Math.round(((y - height) * 12) / height);
        if (Math.abs(x - cx) <= 4) {
          data[i] = 40 + (n % 12);
          data[i + 1] = 150 + (n % 30);
          data[i + 2] = 45 + (n % 12);
        }
      }
    }
  }
  return { width, height, data };
}

function writePpm(path: string, img: RgbImage): void {
  const header = Buffer.from(`P6\n${img.width} ${img.height}\n255\n`, "ascii");
  writeFileSync(path, Buffer.concat([header, Buffer.from(img.data)]));
}

function makeSampleDir(count: number, size = 512): string {
  const dir = tmp("seg-in-");
  for (let i = 0; i < count; i++) {
    const stripes = [size / 2 + (i % 5) * 10 - 20, size / 5, (4 * size) / 5];
    writePpm(join(dir, `img_${String(i).padStart(2, "0")}.ppm`), fieldImage(size, size, stripes, i + 1));
  }
  return dir;
}

describe("excess green scoring", () => {
  it("scores green above neutral and soil below", () => {
    const img: RgbImage = {
      width: 2,
      height: 1,
      data: new Uint8Array([40, 160, 45, 120, 85, 60]),
    };
    const scores = excessGreen(img);
    expect(scores[0]).toBeGreaterThan(0.5);
    expect(scores[1]).toBeLessThan(0.5);
    const mask = binarize(scores, 0.5);
    expect(Array.from(mask)).toEqual([1, 0]);
  });

  it("maps all-black input to an all-zero mask", () => {
    const img: RgbImage = { width: 4, height: 4, data: new Uint8Array(48) };
    const mask = binarize(excessGreen(img), 0.5);
    expect(mask.every((v) => v === 0)).toBe(true);
  });
});

describe("image io", () => {
  it("round-trips PPM and resizes to the target grid", () => {
    const dir = tmp("io-");
    const img = fieldImage(64, 48, [32]);
    writePpm(join(dir, "a.ppm"), img);
    const back = decodeImage(join(dir, "a.ppm"));
    expect(back.width).toBe(64);
    expect(back.height).toBe(48);
    expect(Buffer.from(back.data).equals(Buffer.from(img.data))).toBe(true);
    const scaled = resize(back, 512, 512);
    expect(scaled.width).toBe(512);
    expect(scaled.height).toBe(512);
  });
});

describe("segmentBatch", () => {
  it("emits valid 512x512 binary PGMs and a complete manifest", () => {
    const input = makeSampleDir(4, 200);
    const output = tmp("seg-out-");
    const result = segmentBatch({
      model: "exg",
      inputDir: input,
      outputDir: output,
      threshold: 0.5,
      width: 512,
      height: 512,
    });
    expect(result.processed).toHaveLength(4);
    expect(result.failures).toHaveLength(0);
    for (const { mask } of result.processed) {
      const parsed = decodePgm(readFileSync(mask));
      expect(parsed.width).toBe(512);
      expect(parsed.height).toBe(512);
      const values = new Set(readFileSync(mask).subarray(15));
      for (const v of values) expect([0, 255]).toContain(v);
      expect(parsed.pixels.some((v) => v === 1)).toBe(true);
    }
    const manifest = readFileSync(join(output, "manifest.csv"), "utf-8").trim().split("\n");
    expect(manifest[0]).toBe("input,mask");
    expect(manifest).toHaveLength(1 + 4);
  });

  it("is deterministic across runs", () => {
    const input = makeSampleDir(2, 128);
    const out1 = tmp("det1-");
    const out2 = tmp("det2-");
    const cfg = { model: "exg", inputDir: input, threshold: 0.5, width: 256, height: 256 };
    segmentBatch({ ...cfg, outputDir: out1 });
    segmentBatch({ ...cfg, outputDir: out2 });
    for (const name of readdirSync(out1)) {
      expect(readFileSync(join(out1, name)).equals(readFileSync(join(out2, name)))).toBe(true);
    }
  });

  it("records per-file failures and keeps processing", () => {
    const input = makeSampleDir(2, 64);
    writeFileSync(join(input, "broken.png"), Buffer.from("not a png"));
    const output = tmp("seg-fail-");
    const result = segmentBatch({
      model: "exg",
      inputDir: input,
      outputDir: output,
      threshold: 0.5,
      width: 64,
      height: 64,
    });
    expect(result.processed).toHaveLength(2);
    expect(result.failures).toHaveLength(1);
    expect(result.failures[0].input).toContain("broken.png");
  });

  it("rejects out-of-range thresholds", () => {
    expect(() =>
      segmentBatch({
        model: "exg",
        inputDir: ".",
        outputDir: tmp("x-"),
        threshold: 1.5,
        width: 64,
        height: 64,
      }),
    ).toThrow(/threshold/);
  });
});

describe("rowtrack contract", () => {
  it("emits masks that rowtrack detect processes with exit code 0", () => {
    const probe = spawnSync("rowtrack", ["--help"], { encoding: "utf-8" });
    expect(
      probe.error,
      "the rowtrack CLI must be installed (pip install -e .. --no-build-isolation)",
    ).toBeUndefined();

    const input = makeSampleDir(10);
    const output = tmp("seg-contract-");
    const result = segmentBatch({
      model: "exg",
      inputDir: input,
      outputDir: output,
      threshold: 0.5,
      width: 512,
      height: 512,
    });
    expect(result.processed).toHaveLength(10);

    const manifest = readFileSync(join(output, "manifest.csv"), "utf-8").trim().split("\n");
    expect(manifest.length - 1).toBe(10);

    const masks = result.processed.map((p) => p.mask);
    const detCsv = join(output, "detections.csv");
    const run = spawnSync("rowtrack", ["detect", ...masks, "--out", detCsv], {
      encoding: "utf-8",
    });
    expect(run.status, run.stderr).toBe(0);
    const rows = readFileSync(detCsv, "utf-8").trim().split("\n");
    expect(rows.length - 1).toBe(10);
    // the central stripe is a real line feature: every frame detects
    for (const row of rows.slice(1)) {
      expect(row.endsWith(",0")).toBe(true);
    }
  }, 30000);
});
