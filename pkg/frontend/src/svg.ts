/**
 * Deterministic SVG scene builder: fixed canvas, linear axes, polylines,
 * markers and text annotations.  All numbers are formatted with a fixed
 * precision so re-rendering the same inputs yields identical bytes.
 */

export interface Extent {
  min: number;
  max: number;
}

export function fmt(v: number, digits = 6): string {
  if (!Number.isFinite(v)) return "0";
  const s = v.toPrecision(digits);
  return s.includes("e") ? s : s.replace(/\.?0+$/, (m) => (m.startsWith(".") ? "" : m));
}

export function extent(values: number[]): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      if (v < min) min = v;
      if (v > max) max = v;
    }
  }
  if (!Number.isFinite(min)) {
    min = 0;
    max = 1;
  }
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  return { min, max };
}

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 70, right: 20, top: 40, bottom: 50 };

export class Scene {
  private parts: string[] = [];
  private xExt: Extent;
  private yExt: Extent;

  constructor(
    xExt: Extent,
    yExt: Extent,
    readonly title: string,
    readonly xLabel: string,
    readonly yLabel: string,
  ) {
    this.xExt = xExt;
    this.yExt = yExt;
  }

  sx(x: number): number {
    const f = (x - this.xExt.min) / (this.xExt.max - this.xExt.min);
    return MARGIN.left + f * (WIDTH - MARGIN.left - MARGIN.right);
  }

  sy(y: number): number {
    const f = (y - this.yExt.min) / (this.yExt.max - this.yExt.min);
    return HEIGHT - MARGIN.bottom - f * (HEIGHT - MARGIN.top - MARGIN.bottom);
  }

  polyline(xs: number[], ys: number[], color: string, dash = "") {
    const pts: string[] = [];
    for (let i = 0; i < xs.length; i++) {
      if (Number.isFinite(xs[i]) && Number.isFinite(ys[i])) {
        pts.push(`${fmt(this.sx(xs[i]), 7)},${fmt(this.sy(ys[i]), 7)}`);
      }
    }
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline fill="none" stroke="${color}" stroke-width="1.5"${dashAttr} points="${pts.join(" ")}"/>`,
    );
  }

  markers(xs: number[], ys: number[], color: string, r = 3) {
    for (let i = 0; i < xs.length; i++) {
      if (Number.isFinite(xs[i]) && Number.isFinite(ys[i])) {
        this.parts.push(
          `<circle cx="${fmt(this.sx(xs[i]), 7)}" cy="${fmt(this.sy(ys[i]), 7)}" r="${r}" fill="${color}"/>`,
        );
      }
    }
  }

  annotation(text: string, slot = 0, cls = "annotation") {
    const y = MARGIN.top + 16 + slot * 16;
    this.parts.push(
      `<text class="${cls}" x="${MARGIN.left + 10}" y="${y}" font-size="12" font-family="monospace">${escapeXml(text)}</text>`,
    );
  }

  legend(entries: Array<[string, string]>) {
    entries.forEach(([label, color], i) => {
      const y = MARGIN.top + 16 + i * 16;
      const x = WIDTH - MARGIN.right - 220;
      this.parts.push(
        `<line x1="${x}" y1="${y - 4}" x2="${x + 24}" y2="${y - 4}" stroke="${color}" stroke-width="2"/>`,
      );
      this.parts.push(
        `<text x="${x + 30}" y="${y}" font-size="11" font-family="sans-serif">${escapeXml(label)}</text>`,
      );
    });
  }

  private axes(): string {
    const x0 = MARGIN.left;
    const x1 = WIDTH - MARGIN.right;
    const y0 = HEIGHT - MARGIN.bottom;
    const y1 = MARGIN.top;
    const ticks: string[] = [];
    for (let i = 0; i <= 5; i++) {
      const xv = this.xExt.min + (i / 5) * (this.xExt.max - this.xExt.min);
      const yv = this.yExt.min + (i / 5) * (this.yExt.max - this.yExt.min);
      const px = this.sx(xv);
      const py = this.sy(yv);
      ticks.push(`<line x1="${fmt(px, 7)}" y1="${y0}" x2="${fmt(px, 7)}" y2="${y0 + 5}" stroke="#333"/>`);
      ticks.push(
        `<text x="${fmt(px, 7)}" y="${y0 + 18}" font-size="10" text-anchor="middle" font-family="sans-serif">${fmt(xv, 4)}</text>`,
      );
      ticks.push(`<line x1="${x0 - 5}" y1="${fmt(py, 7)}" x2="${x0}" y2="${fmt(py, 7)}" stroke="#333"/>`);
      ticks.push(
        `<text x="${x0 - 8}" y="${fmt(py + 3, 7)}" font-size="10" text-anchor="end" font-family="sans-serif">${fmt(yv, 4)}</text>`,
      );
    }
    return [
      `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#333"/>`,
      ...ticks,
      `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" font-size="12" text-anchor="middle" font-family="sans-serif">${escapeXml(this.xLabel)}</text>`,
      `<text x="18" y="${(y0 + y1) / 2}" font-size="12" text-anchor="middle" font-family="sans-serif" transform="rotate(-90 18 ${(y0 + y1) / 2})">${escapeXml(this.yLabel)}</text>`,
      `<text x="${(x0 + x1) / 2}" y="22" font-size="14" text-anchor="middle" font-family="sans-serif">${escapeXml(this.title)}</text>`,
    ].join("\n");
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      this.axes(),
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];
