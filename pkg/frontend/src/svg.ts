/** Minimal deterministic SVG scene building: scales, shapes, axes. */

export function fmt(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite coordinate ${x}`);
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export class LinearScale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly r0: number,
    readonly r1: number,
  ) {}

  map(x: number): number {
    return this.r0 + ((x - this.d0) / (this.d1 - this.d0)) * (this.r1 - this.r0);
  }

  ticks(count: number): number[] {
    const step = (this.d1 - this.d0) / count;
    return Array.from({ length: count + 1 }, (_, i) => this.d0 + i * step);
  }
}

export class Log10Scale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly r0: number,
    readonly r1: number,
  ) {
    if (d0 <= 0 || d1 <= 0) throw new Error("log scale needs a positive domain");
  }

  map(x: number): number {
    const t = (Math.log10(x) - Math.log10(this.d0)) / (Math.log10(this.d1) - Math.log10(this.d0));
    return this.r0 + t * (this.r1 - this.r0);
  }

  /** Powers of ten inside the domain. */
  ticks(): number[] {
    const out: number[] = [];
    for (let e = Math.ceil(Math.log10(this.d0)); e <= Math.floor(Math.log10(this.d1)); e += 1) {
      out.push(10 ** e);
    }
    return out;
  }
}

export function rect(x: number, y: number, w: number, h: number, fill: string): string {
  return `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`;
}

export function line(x1: number, y1: number, x2: number, y2: number, stroke = "black", width = 1): string {
  return (
    `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
    `stroke="${stroke}" stroke-width="${width}"/>`
  );
}

export function polyline(points: Array<[number, number]>, stroke = "black", width = 1.5): string {
  const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return `<polyline points="${path}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`;
}

export function text(
  x: number,
  y: number,
  content: string,
  anchor: "start" | "middle" | "end" = "middle",
  size = 11,
): string {
  return (
    `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" ` +
    `font-family="sans-serif" font-size="${size}">${content}</text>`
  );
}

export function svgDocument(width: number, height: number, body: string[]): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}">\n` +
    body.join("\n") +
    "\n</svg>\n"
  );
}
