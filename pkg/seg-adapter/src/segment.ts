/** Vegetation segmentation backends producing per-pixel scores in [0, 1]. */

import type { RgbImage } from "./image.js";

export type SegmentationModel = (img: RgbImage) => Float32Array;

/**
 * Excess-green index: 2G - R - B, affinely mapped from [-510, 510] to
 * [0, 1], so the default 0.5 threshold keeps exactly the pixels strictly
 * greener than neutral (black and grey score 0.5 and stay background).
 * Deterministic and self-contained; any model producing a [0, 1] score
 * map can be registered alongside it.
 */
export function excessGreen(img: RgbImage): Float32Array {
  const n = img.width * img.height;
  const scores = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    const r = img.data[i * 3];
    const g = img.data[i * 3 + 1];
    const b = img.data[i * 3 + 2];
    scores[i] = 0.5 + (2 * g - r - b) / 1020;
  }
  return scores;
}

const MODELS: Record<string, SegmentationModel> = {
  exg: excessGreen,
};

export function resolveModel(name: string): SegmentationModel {
  const model = MODELS[name];
  if (!model) {
    throw new Error(`unknown model "${name}" (available: ${Object.keys(MODELS).join(", ")})`);
  }
  return model;
}

export function binarize(scores: Float32Array, threshold: number): Uint8Array {
  const out = new Uint8Array(scores.length);
  for (let i = 0; i < scores.length; i++) out[i] = scores[i] > threshold ? 1 : 0;
  return out;
}
