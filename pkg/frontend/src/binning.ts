/** Histogram binning with the paper's density normalization (area 1 over the plotted range). */

import { DataError } from "./csv.js";

export interface Histogram {
  edges: number[];
  density: number[];
  inRange: number;
}

export function histogram(values: number[], binWidth: number, lo: number, hi: number): Histogram {
  if (!(binWidth > 0) || !(hi > lo)) {
    throw new DataError(`bad histogram parameters: width=${binWidth}, range=[${lo}, ${hi}]`);
  }
  const nBins = Math.ceil((hi - lo) / binWidth - 1e-9);
  const counts = new Array<number>(nBins).fill(0);
  let inRange = 0;
  for (const v of values) {
    if (v < lo || v >= lo + nBins * binWidth) continue;
    counts[Math.floor((v - lo) / binWidth)] += 1;
    inRange += 1;
  }
  if (inRange === 0) {
    throw new DataError("no samples fall inside the plotted range");
  }
  const edges = Array.from({ length: nBins + 1 }, (_, i) => lo + i * binWidth);
  const density = counts.map((c) => c / (inRange * binWidth));
  return { edges, density, inRange };
}

export function mean(values: number[]): number {
  if (values.length === 0) throw new DataError("mean of empty sample");
  return values.reduce((a, b) => a + b, 0) / values.length;
}

/** Sample standard deviation (ddof = 1); zero for a single observation. */
export function sampleStd(values: number[]): number {
  if (values.length < 2) return 0;
  const m = mean(values);
  const ss = values.reduce((acc, v) => acc + (v - m) * (v - m), 0);
  return Math.sqrt(ss / (values.length - 1));
}
