#!/usr/bin/env node
/** Command line: segment an image directory into rowtrack-compatible masks. */

import { parseArgs } from "node:util";

import { DEFAULTS, segmentBatch } from "./batch.js";

const HELP = `usage: seg-adapter --input-dir DIR --output-dir DIR [options]

Segments RGB crop-row images (.png, .ppm) into binary P5 PGM masks and
writes a manifest.csv mapping each input to its mask.

options:
  --input-dir DIR    directory of input images (required)
  --output-dir DIR   directory for masks and manifest (required)
  --model NAME       segmentation backend (default: ${DEFAULTS.model})
  --threshold T      binarization threshold in (0, 1) (default: ${DEFAULTS.threshold})
  --size WxH         output mask size (default: ${DEFAULTS.width}x${DEFAULTS.height})
  --help             show this message
`;

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        "input-dir": { type: "string" },
        "output-dir": { type: "string" },
        model: { type: "string", default: DEFAULTS.model },
        threshold: { type: "string", default: String(DEFAULTS.threshold) },
        size: { type: "string", default: `${DEFAULTS.width}x${DEFAULTS.height}` },
        help: { type: "boolean", default: false },
      },
    });
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
  const opts = parsed.values;
  if (opts.help) {
    process.stdout.write(HELP);
    return 0;
  }
  if (!opts["input-dir"] || !opts["output-dir"]) {
    console.error("error: --input-dir and --output-dir are required");
    return 2;
  }
  const sizeMatch = /^(\d+)x(\d+)$/.exec(opts.size as string);
  if (!sizeMatch) {
    console.error(`error: bad --size ${opts.size}, expected WxH`);
    return 2;
  }

  let result;
  try {
    result = segmentBatch({
      model: opts.model as string,
      inputDir: opts["input-dir"] as string,
      outputDir: opts["output-dir"] as string,
      threshold: Number(opts.threshold),
      width: parseInt(sizeMatch[1], 10),
      height: parseInt(sizeMatch[2], 10),
    });
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }

  for (const failure of result.failures) {
    console.error(`error: ${failure.input}: ${failure.error}`);
  }
  console.log(`segmented ${result.processed.length} image(s), ${result.failures.length} failure(s)`);
  return result.processed.length === 0 ? 1 : 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
