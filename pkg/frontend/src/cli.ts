import { parseArgs } from "node:util";

import { SchemaError } from "./aggregate.js";
import { renderAll } from "./figures.js";

export function main(argv: string[]): number {
  let values;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        csv: { type: "string" },
        out: { type: "string", default: "charts" },
        normalize: { type: "boolean", default: false },
        help: { type: "boolean", default: false },
      },
    }));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }

  if (values.help || !values.csv) {
    console.error("usage: vecsim-charts --csv <aggregate.csv> [--out <dir>] [--normalize]");
    return values.help ? 0 : 1;
  }

  try {
    const written = renderAll(values.csv, values.out!, values.normalize!);
    for (const path of written) {
      console.log(`wrote ${path}`);
    }
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || (err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${(err as Error).message}`);
      return 1;
    }
    throw err;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
