/** Standalone renderer: `node dist/cli.js --spec figure.json`. */

import { loadSpec } from "./spec.js";
import { renderSpec } from "./render.js";

export function main(argv: string[]): number {
  const args = [...argv];
  let specPath: string | undefined;
  while (args.length > 0) {
    const flag = args.shift();
    if (flag === "--spec") {
      if (specPath !== undefined) {
        console.error("error: --spec given twice; one figure per invocation");
        return 1;
      }
      specPath = args.shift();
      if (specPath === undefined) {
        console.error("error: --spec needs a path");
        return 1;
      }
    } else {
      console.error(`error: unknown argument '${flag}'`);
      return 1;
    }
  }
  if (specPath === undefined) {
    console.error("usage: render --spec <figure.json>");
    return 1;
  }
  try {
    const out = renderSpec(loadSpec(specPath));
    console.log(out);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
