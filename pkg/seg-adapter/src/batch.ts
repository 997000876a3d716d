/** Batch segmentation: image directory in, PGM masks plus manifest out. */

import { mkdirSync, readdirSync, renameSync, writeFileSync } from "node:fs";
import { basename, extname, join } from "node:path";

import { decodeImage, resize } from "./image.js";
import { encodePgm } from "./pgm.js";
import { binarize, resolveModel } from "./segment.js";

export interface AdapterConfig {
  model: string;
  inputDir: string;
  outputDir: string;
  threshold: number;
  width: number;
  height: number;
}

export const DEFAULTS = {
  model: "exg",
  threshold: 0.5,
  width: 512,
  height: 512,
};

export interface BatchResult {
  processed: { input: string; mask: string }[];
  failures: { input: string; error: string }[];
}

const IMAGE_EXTENSIONS = new Set([".png", ".ppm"]);

export function listImages(dir: string): string[] {
  return readdirSync(dir)
    .filter((name) => IMAGE_EXTENSIONS.has(extname(name).toLowerCase()))
    .sort()
    .map((name) => join(dir, name));
}

function writeAtomic(path: string, data: Buffer | string): void {
  const tmp = `${path}.tmp`;
  writeFileSync(tmp, data);
  renameSync(tmp, path);
}

function maskName(imagePath: string): string {
  const stem = basename(imagePath, extname(imagePath));
  return `${stem}.pgm`;
}

export function segmentBatch(config: AdapterConfig): BatchResult {
  if (!(config.threshold > 0 && config.threshold < 1)) {
    throw new Error(`threshold must be in (0, 1), got ${config.threshold}`);
  }
  const model = resolveModel(config.model);
  const inputs = listImages(config.inputDir);
  if (inputs.length === 0) {
    throw new Error(`no .png or .ppm images in ${config.inputDir}`);
  }
  mkdirSync(config.outputDir, { recursive: true });

  const result: BatchResult = { processed: [], failures: [] };
  for (const input of inputs) {
    try {
      const img = resize(decodeImage(input), config.width, config.height);
      const mask = binarize(model(img), config.threshold);
      const out = join(config.outputDir, maskName(input));
      writeAtomic(out, encodePgm(img.width, img.height, mask));
      result.processed.push({ input, mask: out });
    } catch (err) {
      result.failures.push({ input, error: err instanceof Error ? err.message : String(err) });
    }
  }

  // Mask column is the file name; the manifest sits next to the masks.
  const manifestRows = ["input,mask"];
  for (const { input, mask } of result.processed) {
    manifestRows.push(`${basename(input)},${basename(mask)}`);
  }
  writeAtomic(join(config.outputDir, "manifest.csv"), manifestRows.join("\n") + "\n");
  return result;
}
