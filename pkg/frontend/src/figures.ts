/**
 * The three figure kinds rendered from experiment CSVs.
 *
 * All statistics here are limited to binning, means and standard deviations;
 * reference curves are read from exported tables and never recomputed.
 */

import {
  DataError,
  EXPERIMENT_COLUMNS,
  REFERENCE_COLUMNS,
  Table,
  numericColumn,
  stringColumn,
  validateColumns,
} from "./csv.js";
import { histogram, mean, sampleStd } from "./binning.js";
import { LinearScale, Log10Scale, line, polyline, rect, svgDocument, text } from "./svg.js";

export type FigureKind = "hist_overlay" | "hist_grid" | "ks_loglog";

export interface FigureOptions {
  binWidth?: number;
  sMax?: number;
  guideCoefficient?: number;
}

interface RefCurve {
  s: number[];
  p: number[];
}

function referenceCurve(ref: Table): RefCurve {
  validateColumns(ref, REFERENCE_COLUMNS, "reference table");
  return { s: numericColumn(ref, "s"), p: numericColumn(ref, "p") };
}

function refPolyline(
  curve: RefCurve,
  xScale: LinearScale,
  yScale: LinearScale,
  sMax: number,
): string {
  const pts: Array<[number, number]> = [];
  for (let i = 0; i < curve.s.length; i += 1) {
    if (curve.s[i] > sMax) break;
    pts.push([xScale.map(curve.s[i]), yScale.map(curve.p[i])]);
  }
  if (pts.length < 2) throw new DataError("reference table does not cover the plotted range");
  return polyline(pts, "black", 1.5);
}

function bars(
  values: number[],
  binWidth: number,
  sMax: number,
  xScale: LinearScale,
  yScale: LinearScale,
  fill: string,
): string[] {
  const h = histogram(values, binWidth, 0, sMax);
  const out: string[] = [];
  for (let i = 0; i < h.density.length; i += 1) {
    if (h.density[i] <= 0) continue;
    const x0 = xScale.map(h.edges[i]);
    const x1 = xScale.map(h.edges[i + 1]);
    const yTop = yScale.map(h.density[i]);
    const yBase = yScale.map(0);
    out.push(rect(x0, yTop, x1 - x0, yBase - yTop, fill));
  }
  return out;
}

function frameAxes(
  xScale: LinearScale,
  yScale: LinearScale,
  xTickCount: number,
  yTickCount: number,
): string[] {
  const out: string[] = [];
  const y0 = yScale.map(0);
  const x0 = xScale.map(xScale.d0);
  out.push(line(x0, y0, xScale.map(xScale.d1), y0));
  out.push(line(x0, y0, x0, yScale.map(yScale.d1)));
  for (const t of xScale.ticks(xTickCount)) {
    const x = xScale.map(t);
    out.push(line(x, y0, x, y0 + 4));
    out.push(text(x, y0 + 16, String(Number(t.toFixed(6)))));
  }
  for (const t of yScale.ticks(yTickCount)) {
    if (t === 0) continue;
    const y = yScale.map(t);
    out.push(line(x0 - 4, y, x0, y));
    out.push(text(x0 - 8, y + 4, String(Number(t.toFixed(6))), "end"));
  }
  return out;
}

/** Single-panel gap histogram with the reference density overlaid. */
export function renderHistOverlay(data: Table, ref: Table, options: FigureOptions = {}): string {
  const kind = data.rows[0]?.[0] ?? "";
  const schema =
    kind === "quenched_bulk_sampling"
      ? EXPERIMENT_COLUMNS.quenched_bulk_sampling
      : EXPERIMENT_COLUMNS.annealed_gap;
  validateColumns(data, schema, "gap histogram input");
  const binWidth = options.binWidth ?? 0.075;
  const sMax = options.sMax ?? 3.0;
  const s = numericColumn(data, "s");
  const width = 640;
  const height = 240;
  const xScale = new LinearScale(0, sMax, 50, width - 15);
  const yScale = new LinearScale(0, 1.2, height - 30, 12);
  const curve = referenceCurve(ref);
  const body = [
    ...bars(s, binWidth, sMax, xScale, yScale, "#cccccc"),
    ...frameAxes(xScale, yScale, 3, 2),
    refPolyline(curve, xScale, yScale, sMax),
    text(width / 2, height - 6, `rescaled gaps, ${s.length} samples`, "middle", 10),
  ];
  return svgDocument(width, height, body);
}

/** Grid of gap histograms, one panel per (arm, size), with the reference curve. */
export function renderHistGrid(data: Table, ref: Table, options: FigureOptions = {}): string {
  validateColumns(data, EXPERIMENT_COLUMNS.monoparametric_quenched, "monoparametric input");
  const binWidth = options.binWidth ?? 0.2;
  const sMax = options.sMax ?? 3.2;
  const arms = stringColumn(data, "arm");
  const sizes = numericColumn(data, "N");
  const svals = numericColumn(data, "s");
  const groups = new Map<string, number[]>();
  for (let i = 0; i < arms.length; i += 1) {
    const key = `${arms[i]}|${sizes[i]}`;
    const bucket = groups.get(key) ?? [];
    bucket.push(svals[i]);
    groups.set(key, bucket);
  }
  const armNames = [...new Set(arms)].sort();
  const nValues = [...new Set(sizes)].sort((a, b) => a - b);
  const panelW = 200;
  const panelH = 130;
  const margin = 45;
  const width = margin + nValues.length * panelW + 10;
  const height = 20 + armNames.length * panelH + 25;
  const curve = referenceCurve(ref);
  const body: string[] = [];
  armNames.forEach((arm, r) => {
    nValues.forEach((n, c) => {
      const key = `${arm}|${n}`;
      const values = groups.get(key);
      if (!values || values.length === 0) {
        throw new DataError(`missing panel data for arm=${arm}, N=${n}`);
      }
      const x0 = margin + c * panelW;
      const y0 = 20 + r * panelH;
      const xScale = new LinearScale(0, sMax, x0, x0 + panelW - 20);
      const yScale = new LinearScale(0, 1.2, y0 + panelH - 25, y0 + 8);
      body.push(...bars(values, binWidth, sMax, xScale, yScale, r === 0 ? "#cccccc" : "#999999"));
      body.push(...frameAxes(xScale, yScale, 3, 2));
      body.push(refPolyline(curve, xScale, yScale, sMax));
      if (r === 0) body.push(text(x0 + panelW / 2 - 10, 14, `N=${n}`, "middle", 12));
      if (c === 0) body.push(text(x0 - 32, y0 + panelH / 2, arm, "middle", 12));
    });
  });
  return svgDocument(width, height, body);
}

interface SeriesPoint {
  n: number;
  mean: number;
  std: number;
}

/** Log-log KS distance vs N with repetition error bars and a power-law guide. */
export function renderKsLoglog(data: Table, options: FigureOptions = {}): string {
  validateColumns(data, EXPERIMENT_COLUMNS.ks_convergence, "ks_convergence input");
  const guideCoef = options.guideCoefficient ?? 0.33;
  const arms = stringColumn(data, "arm");
  const sizes = numericColumn(data, "N");
  const ks = numericColumn(data, "ks");
  const groups = new Map<string, number[]>();
  for (let i = 0; i < arms.length; i += 1) {
    const key = `${arms[i]}|${sizes[i]}`;
    const bucket = groups.get(key) ?? [];
    bucket.push(ks[i]);
    groups.set(key, bucket);
  }
  const armNames = [...new Set(arms)].sort();
  const series = new Map<string, SeriesPoint[]>();
  for (const arm of armNames) {
    const pts: SeriesPoint[] = [];
    for (const n of [...new Set(sizes)].sort((a, b) => a - b)) {
      const vals = groups.get(`${arm}|${n}`);
      if (!vals) continue;
      pts.push({ n, mean: mean(vals), std: sampleStd(vals) });
    }
    series.set(arm, pts);
  }
  const allN = [...new Set(sizes)];
  const width = 620;
  const height = 300;
  const xScale = new Log10Scale(Math.min(...allN) / 1.5, Math.max(...allN) * 1.5, 60, width - 20);
  const yScale = new Log10Scale(0.01, 1.0, height - 40, 15);
  const body: string[] = [];
  // frame and decade ticks
  body.push(line(60, height - 40, width - 20, height - 40));
  body.push(line(60, height - 40, 60, 15));
  for (const t of xScale.ticks()) {
    body.push(line(xScale.map(t), height - 40, xScale.map(t), height - 36));
    body.push(text(xScale.map(t), height - 22, String(t)));
  }
  for (const t of yScale.ticks()) {
    body.push(line(56, yScale.map(t), 60, yScale.map(t)));
    body.push(text(52, yScale.map(t) + 4, String(t), "end"));
  }
  body.push(text(width / 2, height - 6, "N"));
  // guide ~ N^{-1/6}
  const guide: Array<[number, number]> = allN
    .sort((a, b) => a - b)
    .map((n) => [xScale.map(n), yScale.map(guideCoef * n ** (-1 / 6))]);
  body.push(
    `<polyline points="${guide.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ")}" ` +
      'fill="none" stroke="#888888" stroke-width="1" stroke-dasharray="6,4"/>',
  );
  const colors = ["#000000", "#3366cc", "#cc3333"];
  armNames.forEach((arm, k) => {
    const pts = series.get(arm) ?? [];
    if (pts.length === 0) throw new DataError(`no points for arm ${arm}`);
    const color = colors[k % colors.length];
    body.push(
      polyline(pts.map((p) => [xScale.map(p.n), yScale.map(p.mean)]), color, 1.5),
    );
    for (const p of pts) {
      const x = xScale.map(p.n);
      const hi = Math.max(p.mean + p.std, 1e-6);
      const lo = Math.max(p.mean - p.std, 1e-6);
      body.push(line(x, yScale.map(lo), x, yScale.map(hi), color));
      body.push(line(x - 3, yScale.map(hi), x + 3, yScale.map(hi), color));
      body.push(line(x - 3, yScale.map(lo), x + 3, yScale.map(lo), color));
    }
    body.push(text(width - 130, 25 + 14 * k, arm, "start", 11));
    body.push(line(width - 150, 21 + 14 * k, width - 135, 21 + 14 * k, color, 2));
  });
  body.push(text(width - 130, 25 + 14 * armNames.length, "~N^(-1/6)", "start", 11));
  return svgDocument(width, height, body);
}

export function renderFigure(
  kind: FigureKind,
  data: Table,
  ref: Table | null,
  options: FigureOptions = {},
): string {
  if (kind === "ks_loglog") {
    return renderKsLoglog(data, options);
  }
  if (ref === null) {
    throw new DataError(`figure kind ${kind} needs a reference table (--ref)`);
  }
  if (kind === "hist_overlay") {
    return renderHistOverlay(data, ref, options);
  }
  if (kind === "hist_grid") {
    return renderHistGrid(data, ref, options);
  }
  throw new DataError(`unknown figure kind ${kind as string}`);
}
