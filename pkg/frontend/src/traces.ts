/**
 * Training-curve figures from trace_*.csv files.
 *
 * Traces are grouped into configurations (one group per aggregator, taken
 * from the JSON sidecar); a group with several seeds is drawn as the
 * per-round mean with a min-max band, a single seed as a plain line.
 * Groups whose seeds disagree on the number of rounds are truncated to the
 * common prefix with a warning.
 */

import { mkdirSync, writeFileSync } from "fs";
import { basename, dirname } from "path";

import { numericColumn, readCsv, readSidecar, requireColumns } from "./csv";
import { drawAxes, drawLegend, Figure, fmt, HEIGHT, linearScale, MARGIN,
         seriesColor, WIDTH } from "./svg";

export interface TraceFigureSpec {
  csvPaths: string[];
  outPath: string;
  metric?: "test_accuracy" | "train_loss";  // default test_accuracy
  title?: string;
  warn?: (message: string) => void;         // default console.warn
}

const REQUIRED = ["round", "train_loss", "test_accuracy"];

interface Group {
  label: string;
  rounds: number[];
  runs: number[][];   // one metric series per seed
}

function groupLabel(path: string): string {
  const sidecar = readSidecar(path);
  const agg = sidecar?.["aggregator"];
  if (typeof agg === "string") return agg;
  // fall back to the filename with the per-seed suffix stripped
  return basename(path).replace(/\.csv$/, "").replace(/_seed\d+$/, "")
    .replace(/^trace_/, "");
}

export function loadGroups(spec: TraceFigureSpec): Group[] {
  if (spec.csvPaths.length === 0) {
    throw new Error("no trace files given");
  }
  const metric = spec.metric ?? "test_accuracy";
  const warn = spec.warn ?? ((m: string) => console.warn(m));
  const groups = new Map<string, { rounds: number[]; runs: number[][] }>();
  for (const path of spec.csvPaths) {
    const table = readCsv(path);
    requireColumns(table, REQUIRED);
    const rounds = numericColumn(table, "round").map((v) => {
      if (v === null) throw new Error(`${path}: NA round`);
      return v;
    });
    const values = numericColumn(table, metric).map((v) => {
      if (v === null) throw new Error(`${path}: NA ${metric}`);
      return v;
    });
    const label = groupLabel(path);
    const group = groups.get(label) ?? { rounds, runs: [] };
    if (group.runs.length > 0 && rounds.length !== group.rounds.length) {
      const n = Math.min(rounds.length, group.rounds.length);
      warn(`${label}: seeds disagree on round count; truncating to ${n}`);
      group.rounds = group.rounds.slice(0, n);
      group.runs = group.runs.map((r) => r.slice(0, n));
    }
    group.runs.push(values.slice(0, group.rounds.length));
    groups.set(label, group);
  }
  return [...groups.entries()].map(([label, g]) => ({
    label, rounds: g.rounds, runs: g.runs,
  }));
}

export function renderTraceFigure(spec: TraceFigureSpec): string {
  const metric = spec.metric ?? "test_accuracy";
  const groups = loadGroups(spec);
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;

  const xScale = linearScale(groups.flatMap((g) => g.rounds), x0, x1);
  const yScale = linearScale(
    groups.flatMap((g) => g.runs.flat()), y0, y1);

  const fig = new Figure();
  drawAxes(fig, {
    x: xScale, y: yScale,
    xLabel: "communication round",
    yLabel: metric.replace("_", " "),
  });
  if (spec.title) {
    fig.text(WIDTH / 2, 18, spec.title, 'text-anchor="middle"');
  }

  const legend: { label: string; color: string }[] = [];
  groups.forEach((group, gi) => {
    const color = seriesColor(group.label, gi);
    const n = group.rounds.length;
    const mean: number[] = [];
    const lo: number[] = [];
    const hi: number[] = [];
    for (let t = 0; t < n; t += 1) {
      const at = group.runs.map((r) => r[t]);
      mean.push(at.reduce((a, b) => a + b, 0) / at.length);
      lo.push(Math.min(...at));
      hi.push(Math.max(...at));
    }
    if (group.runs.length > 1) {
      const upper = group.rounds.map((r, t) =>
        `${fmt(xScale(r))},${fmt(yScale(hi[t]))}`);
      const lower = [...group.rounds.keys()].reverse().map((t) =>
        `${fmt(xScale(group.rounds[t]))},${fmt(yScale(lo[t]))}`);
      fig.add(`<g data-series="${group.label}" data-role="band">` +
        `<polygon points="${[...upper, ...lower].join(" ")}" ` +
        `fill="${color}" fill-opacity="0.15" stroke="none"/></g>`);
    }
    const line = group.rounds.map((r, t) =>
      `${fmt(xScale(r))},${fmt(yScale(mean[t]))}`).join(" ");
    fig.add(`<g data-series="${group.label}" data-role="mean">` +
      `<polyline points="${line}" fill="none" stroke="${color}" ` +
      `stroke-width="2"/></g>`);
    legend.push({
      label: group.runs.length > 1
        ? `${group.label} (${group.runs.length} seeds)` : group.label,
      color,
    });
  });
  drawLegend(fig, legend);

  const svg = fig.render();
  mkdirSync(dirname(spec.outPath), { recursive: true });
  writeFileSync(spec.outPath, svg);
  return svg;
}
