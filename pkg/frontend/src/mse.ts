/**
 * Error-versus-axis figures from mse_sweep.csv files.
 *
 * Empirical estimates are drawn as markers, closed-form predictions as
 * dashed lines; schemes whose closed-form cells are NA get a marker-only
 * series.  The RIS-size axis is drawn log-log, other axes semi-log (log
 * error scale); the quantizer-bits axis is categorical with "cont" for the
 * continuous-phase row.
 */

import { mkdirSync, writeFileSync } from "fs";
import { dirname } from "path";

import { numericColumn, readCsv, readSidecar, requireColumns,
         stringColumn, Table } from "./csv";
import { drawAxes, drawLegend, Figure, fmt, HEIGHT, linearScale, logScale,
         MARGIN, Scale, seriesColor, WIDTH } from "./svg";

export interface MseFigureSpec {
  csvPath: string;
  outPath: string;
  metric?: string;       // default "empirical"
  schemes?: string[];    // default: every scheme in the file
  logX?: boolean;        // default: true on the N axis
  logY?: boolean;        // default true
  title?: string;
}

const REQUIRED = ["axis", "scheme", "empirical", "closed_form", "stderr"];

const AXIS_LABEL: Record<string, string> = {
  N: "RIS elements N",
  P: "max transmit power (dBm)",
  K: "target devices K",
  M: "interferers M",
  bits: "phase quantizer bits",
};

function axisName(table: Table): string {
  const sidecar = readSidecar(table.path);
  const axis = sidecar?.["axis"];
  return typeof axis === "string" ? axis : "axis";
}

interface Series {
  scheme: string;
  axis: number[];
  empirical: number[];
  closedForm: (number | null)[];
}

function collectSeries(table: Table, metric: string,
                       wanted?: string[]): Series[] {
  const schemes = stringColumn(table, "scheme");
  const axis = numericColumn(table, "axis");
  const emp = numericColumn(table, metric);
  const cf = numericColumn(table, "closed_form");
  const order: string[] = [];
  for (const s of schemes) {
    if (!order.includes(s)) order.push(s);
  }
  const selected = wanted ?? order;
  for (const s of selected) {
    if (!order.includes(s)) {
      throw new Error(`${table.path}: no rows for scheme '${s}'`);
    }
  }
  return selected.map((scheme) => {
    const series: Series = { scheme, axis: [], empirical: [], closedForm: [] };
    schemes.forEach((s, i) => {
      if (s !== scheme) return;
      const a = axis[i];
      const e = emp[i];
      if (a === null || e === null) {
        throw new Error(`${table.path}: NA in axis/${metric} column`);
      }
      series.axis.push(a);
      series.empirical.push(e);
      series.closedForm.push(cf[i]);
    });
    return series;
  });
}

export function renderMseFigure(spec: MseFigureSpec): string {
  const table = readCsv(spec.csvPath);
  requireColumns(table, REQUIRED);
  const metric = spec.metric ?? "empirical";
  const axis = axisName(table);
  const series = collectSeries(table, metric, spec.schemes);

  const categorical = axis === "bits";
  let positions: Map<number, number> | null = null;
  let tickLabels: Map<number, string> | undefined;
  const xValues = series.flatMap((s) => s.axis);
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;

  let xScale: Scale;
  if (categorical) {
    const distinct = [...new Set(xValues)].sort((a, b) => a - b);
    positions = new Map(distinct.map((v, i) => [v, i]));
    const idx = [...positions.values()];
    xScale = linearScale(idx.length > 1 ? idx : [0, 1], x0, x1);
    xScale.ticks = idx;
    tickLabels = new Map(idx.map((i) => {
      const value = distinct[i];
      return [i, Number.isFinite(value) ? String(value) : "cont"];
    }));
  } else {
    const logX = spec.logX ?? axis === "N";
    xScale = logX ? logScale(xValues, x0, x1) : linearScale(xValues, x0, x1);
  }

  const yValues = series.flatMap((s) =>
    s.empirical.concat(s.closedForm.filter((v): v is number => v !== null)));
  const logY = spec.logY ?? true;
  const yScale = logY ? logScale(yValues, y0, y1)
    : linearScale(yValues, y0, y1);

  const fig = new Figure();
  drawAxes(fig, {
    x: xScale, y: yScale,
    xLabel: AXIS_LABEL[axis] ?? axis,
    yLabel: `normalized MSE (${metric})`,
    xTickLabels: tickLabels,
  });
  if (spec.title) {
    fig.text(WIDTH / 2, 18, spec.title, 'text-anchor="middle"');
  }

  const legend: { label: string; color: string; dashed?: boolean }[] = [];
  series.forEach((s, i) => {
    const color = seriesColor(s.scheme, i);
    const px = (v: number) =>
      xScale(positions ? positions.get(v)! : v);
    const markers = s.axis.map((a, j) =>
      `<circle cx="${fmt(px(a))}" cy="${fmt(yScale(s.empirical[j]))}" ` +
      `r="4" fill="${color}"/>`).join("");
    fig.add(`<g data-series="${s.scheme}" data-role="empirical">` +
      `${markers}</g>`);
    legend.push({ label: s.scheme, color });
    const cf = s.closedForm;
    if (cf.every((v) => v !== null)) {
      const points = s.axis.map((a, j) =>
        `${fmt(px(a))},${fmt(yScale(cf[j] as number))}`).join(" ");
      fig.add(`<g data-series="${s.scheme}" data-role="closed-form">` +
        `<polyline points="${points}" fill="none" stroke="${color}" ` +
        `stroke-width="2" stroke-dasharray="6 3"/></g>`);
      legend.push({ label: `${s.scheme} (analytical)`, color, dashed: true });
    }
  });
  drawLegend(fig, legend);

  const svg = fig.render();
  mkdirSync(dirname(spec.outPath), { recursive: true });
  writeFileSync(spec.outPath, svg);
  return svg;
}
