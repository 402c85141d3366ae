/**
 * Figure regeneration from simulator CSVs.
 *
 *   plot mse --csv out/mse_vs_n/mse_sweep.csv --out figs/mse_vs_n.svg
 *   plot traces --out figs/train.svg out/train/trace_*.csv
 */

import { parseArgs } from "node:util";

import { renderMseFigure } from "./mse";
import { renderTraceFigure } from "./traces";

export function run(argv: string[]): number {
  const command = argv[0];
  if (command === "mse") {
    const { values } = parseArgs({
      args: argv.slice(1),
      options: {
        csv: { type: "string" },
        out: { type: "string" },
        metric: { type: "string", default: "empirical" },
        schemes: { type: "string" },
        title: { type: "string" },
      },
    });
    if (!values.csv || !values.out) {
      console.error("usage: plot mse --csv FILE --out FILE.svg "
        + "[--metric NAME] [--schemes a,b] [--title T]");
      return 2;
    }
    renderMseFigure({
      csvPath: values.csv,
      outPath: values.out,
      metric: values.metric,
      schemes: values.schemes ? values.schemes.split(",") : undefined,
      title: values.title,
    });
    console.log(`wrote ${values.out}`);
    return 0;
  }
  if (command === "traces") {
    const { values, positionals } = parseArgs({
      args: argv.slice(1),
      allowPositionals: true,
      options: {
        out: { type: "string" },
        metric: { type: "string", default: "test_accuracy" },
        title: { type: "string" },
      },
    });
    if (!values.out || positionals.length === 0) {
      console.error("usage: plot traces --out FILE.svg [--metric NAME] "
        + "trace1.csv [trace2.csv ...]");
      return 2;
    }
    renderTraceFigure({
      csvPaths: positionals,
      outPath: values.out,
      metric: values.metric as "test_accuracy" | "train_loss",
      title: values.title,
    });
    console.log(`wrote ${values.out}`);
    return 0;
  }
  console.error("usage: plot <mse|traces> ...");
  return 2;
}

if (require.main === module) {
  try {
    process.exitCode = run(process.argv.slice(2));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    process.exitCode = 1;
  }
}
