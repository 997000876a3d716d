export { decodeImage, resize, ImageDecodeError } from "./image.js";
export type { RgbImage } from "./image.js";
export { encodePgm, decodePgm } from "./pgm.js";
export type { PgmMask } from "./pgm.js";
export { excessGreen, binarize, resolveModel } from "./segment.js";
export type { SegmentationModel } from "./segment.js";
export { segmentBatch, listImages, DEFAULTS } from "./batch.js";
export type { AdapterConfig, BatchResult } from "./batch.js";
