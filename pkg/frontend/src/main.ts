/**
 * CLI: render --input <run dir> --output <dir> [--only heatmaps|curves|sweep]
 */

import { parseArgs } from "node:util";

import { ArtifactError } from "./artifacts.js";
import { FigureKind, render } from "./render.js";

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        input: { type: "string" },
        output: { type: "string" },
        only: { type: "string" },
      },
    });
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  const [command] = parsed.positionals;
  const { input, output, only } = parsed.values;
  if (command !== "render" || !input || !output) {
    console.error("usage: render --input <run dir> --output <dir> [--only heatmaps|curves|sweep]");
    return 2;
  }
  if (only && !["heatmaps", "curves", "sweep"].includes(only)) {
    console.error(`--only must be heatmaps, curves or sweep, got ${only}`);
    return 2;
  }
  try {
    const files = render({ inputDir: input, outputDir: output, only: only as FigureKind });
    console.log(`wrote ${files.length} figures to ${output}`);
    return 0;
  } catch (err) {
    if (err instanceof ArtifactError) {
      console.error(`error reading ${err.file}: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

process.exitCode = main(process.argv.slice(2));
