/** Command-line figure rendering: one figure per invocation. */

import { SchemaError } from "./csv.js";
import { FigureKind, FigureSpec, render } from "./figures.js";

function parseArgs(argv: string[]): FigureSpec {
  const opts = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new SchemaError(`malformed arguments near '${key}'`);
    }
    opts.set(key.slice(2), argv[i + 1]);
  }
  for (const req of ["kind", "input", "output"]) {
    if (!opts.has(req)) {
      throw new SchemaError(`missing required argument --${req}`);
    }
  }
  const spec: FigureSpec = {
    kind: opts.get("kind") as FigureKind,
    input: opts.get("input")!,
    output: opts.get("output")!,
  };
  if (opts.has("manifest")) spec.manifest = opts.get("manifest");
  if (opts.has("column")) spec.column = opts.get("column");
  if (opts.has("regime")) spec.regime = opts.get("regime");
  if (opts.has("title")) spec.title = opts.get("title");
  if (opts.has("t-lo") || opts.has("t-hi")) {
    spec.window = [
      Number(opts.get("t-lo") ?? "-Infinity"),
      Number(opts.get("t-hi") ?? "Infinity"),
    ];
  }
  return spec;
}

try {
  const spec = parseArgs(process.argv.slice(2));
  const out = render(spec);
  console.log(out);
} catch (err) {
  if (err instanceof SchemaError) {
    console.error(`schema error: ${err.message}`);
    process.exit(2);
  }
  throw err;
}
