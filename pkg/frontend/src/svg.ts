/**
 * Minimal deterministic SVG assembly: fixed styling, fixed float
 * formatting, nothing time- or environment-dependent, so identical inputs
 * render byte-identical files.
 */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { left: 72, right: 160, top: 28, bottom: 52 };

export const PALETTE: Record<string, string> = {
  power_inversion: "#1f77b4",
  weighted_full_power: "#d62728",
  bev_random: "#7f7f7f",
  bev_round_robin: "#2ca02c",
  bev_min_mse: "#9467bd",
  ideal: "#000000",
};

export function seriesColor(name: string, index: number): string {
  const fallback = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#ff7f0e"];
  return PALETTE[name] ?? fallback[index % fallback.length];
}

export function fmt(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`cannot place coordinate ${x}`);
  return x.toFixed(2).replace(/^-0\.00$/, "0.00");
}

export interface Scale {
  (value: number): number;
  ticks: number[];
  log: boolean;
}

function range(lo: number, hi: number): [number, number] {
  if (lo === hi) {
    const pad = lo === 0 ? 1 : Math.abs(lo) * 0.1;
    return [lo - pad, hi + pad];
  }
  return [lo, hi];
}

export function linearScale(values: number[], outLo: number,
                            outHi: number): Scale {
  const [lo, hi] = range(Math.min(...values), Math.max(...values));
  const pad = (hi - lo) * 0.06;
  const a = lo - pad;
  const b = hi + pad;
  const scale = ((v: number) =>
    outLo + ((v - a) / (b - a)) * (outHi - outLo)) as Scale;
  const step = niceStep(b - a);
  const ticks: number[] = [];
  for (let t = Math.ceil(a / step) * step; t <= b + 1e-12; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  scale.ticks = ticks;
  scale.log = false;
  return scale;
}

function niceStep(span: number): number {
  const raw = span / 5;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

export function logScale(values: number[], outLo: number,
                         outHi: number): Scale {
  const positive = values.filter((v) => v > 0);
  if (positive.length === 0) {
    throw new Error("log scale needs positive values");
  }
  const [lo, hi] = range(Math.min(...positive), Math.max(...positive));
  const a = Math.log10(lo) - 0.05;
  const b = Math.log10(hi) + 0.05;
  const scale = ((v: number) =>
    outLo + ((Math.log10(v) - a) / (b - a)) * (outHi - outLo)) as Scale;
  const ticks: number[] = [];
  for (let e = Math.ceil(a); e <= Math.floor(b); e += 1) {
    ticks.push(Math.pow(10, e));
  }
  if (ticks.length < 2) {
    // narrow span: fall back to 1-2-5 ticks inside the decade
    ticks.length = 0;
    for (let e = Math.floor(a); e <= Math.ceil(b); e += 1) {
      for (const m of [1, 2, 5]) {
        const t = m * Math.pow(10, e);
        if (Math.log10(t) >= a && Math.log10(t) <= b) ticks.push(t);
      }
    }
  }
  scale.ticks = ticks;
  scale.log = true;
  return scale;
}

export function tickLabel(v: number): string {
  if (v === 0) return "0";
  const exp = Math.log10(Math.abs(v));
  if (Number.isInteger(exp) && (exp >= 4 || exp <= -3)) {
    return `1e${exp >= 0 ? "" : ""}${exp}`;
  }
  if (Math.abs(v) >= 1000) return String(v);
  return parseFloat(v.toPrecision(6)).toString();
}

export class Figure {
  private parts: string[] = [];

  add(element: string): void {
    this.parts.push(element);
  }

  text(x: number, y: number, content: string, attrs = ""): void {
    this.add(`<text x="${fmt(x)}" y="${fmt(y)}" ${attrs}>${content}</text>`);
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
      `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
      `font-family="Helvetica, Arial, sans-serif" font-size="13">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
      ...this.parts,
      "</svg>",
      "",
    ].join("\n");
  }
}

export interface AxisSpec {
  x: Scale;
  y: Scale;
  xLabel: string;
  yLabel: string;
  xTickLabels?: Map<number, string>;
}

export function drawAxes(fig: Figure, spec: AxisSpec): void {
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  fig.add(`<g stroke="#333333" stroke-width="1" fill="none">` +
    `<path d="M ${fmt(x0)} ${fmt(y1)} V ${fmt(y0)} H ${fmt(x1)}"/></g>`);
  for (const t of spec.x.ticks) {
    const px = spec.x(t);
    if (px < x0 - 0.5 || px > x1 + 0.5) continue;
    fig.add(`<line x1="${fmt(px)}" y1="${fmt(y0)}" x2="${fmt(px)}" ` +
      `y2="${fmt(y0 + 5)}" stroke="#333333"/>`);
    const label = spec.xTickLabels?.get(t) ?? tickLabel(t);
    fig.text(px, y0 + 20, label, 'text-anchor="middle"');
  }
  for (const t of spec.y.ticks) {
    const py = spec.y(t);
    if (py < y1 - 0.5 || py > y0 + 0.5) continue;
    fig.add(`<line x1="${fmt(x0 - 5)}" y1="${fmt(py)}" x2="${fmt(x0)}" ` +
      `y2="${fmt(py)}" stroke="#333333"/>`);
    fig.add(`<line x1="${fmt(x0)}" y1="${fmt(py)}" x2="${fmt(x1)}" ` +
      `y2="${fmt(py)}" stroke="#eeeeee"/>`);
    fig.text(x0 - 9, py + 4, tickLabel(t), 'text-anchor="end"');
  }
  fig.text((x0 + x1) / 2, HEIGHT - 14, spec.xLabel, 'text-anchor="middle"');
  fig.add(`<text x="18" y="${fmt((y0 + y1) / 2)}" text-anchor="middle" ` +
    `transform="rotate(-90 18 ${fmt((y0 + y1) / 2)})">${spec.yLabel}</text>`);
}

export function drawLegend(fig: Figure,
                           entries: { label: string; color: string;
                                      dashed?: boolean }[]): void {
  const x = WIDTH - MARGIN.right + 12;
  let y = MARGIN.top + 10;
  for (const e of entries) {
    const dash = e.dashed ? ' stroke-dasharray="6 3"' : "";
    fig.add(`<line x1="${fmt(x)}" y1="${fmt(y)}" x2="${fmt(x + 24)}" ` +
      `y2="${fmt(y)}" stroke="${e.color}" stroke-width="2"${dash}/>`);
    fig.text(x + 30, y + 4, e.label);
    y += 20;
  }
}
