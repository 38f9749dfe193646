/**
 * Command-line entry: render campaign figures from a sweep CSV.
 *
 *   node dist/cli.js --csv results.csv --outdir figures/
 *   node dist/cli.js --csv results.csv --outdir figures/ --figure npdr
 */

import { mkdirSync } from "node:fs";
import { join } from "node:path";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { FIGURE_IDS, FigureId, render } from "./render.js";

export function main(argv: string[]): number {
  let values;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        csv: { type: "string" },
        outdir: { type: "string" },
        figure: { type: "string" },
      },
    }));
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n`);
    return 2;
  }
  if (!values.csv || !values.outdir) {
    process.stderr.write(
      "usage: cli --csv <campaign.csv> --outdir <dir> [--figure <id>]\n",
    );
    return 2;
  }
  let ids: readonly FigureId[] = FIGURE_IDS;
  if (values.figure !== undefined) {
    if (!(FIGURE_IDS as readonly string[]).includes(values.figure)) {
      process.stderr.write(
        `unknown figure "${values.figure}"; expected one of ${FIGURE_IDS.join(", ")}\n`,
      );
      return 2;
    }
    ids = [values.figure as FigureId];
  }
  mkdirSync(values.outdir, { recursive: true });
  try {
    for (const id of ids) {
      const out = join(values.outdir, `${id}.svg`);
      render({ figure: id, csv: values.csv, out });
      process.stdout.write(`${out}\n`);
    }
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n`);
    return 1;
  }
  return 0;
}

if (
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href
) {
  process.exit(main(process.argv.slice(2)));
}
