/** Small line-chart engine: linear or log axes, ticks, legends. */

import { formatNumber } from "./heatmap.js";
import { BLACK, Color, GRAY, Raster } from "./raster.js";

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: Color;
  markers?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xLog?: boolean;
  yLog?: boolean;
  series: Series[];
  /** horizontal reference lines: [level, label] */
  refLines?: Array<[number, string]>;
  width?: number;
  height?: number;
}

const ML = 58;
const MR = 16;
const MT = 20;
const MB = 34;

export function renderChart(spec: ChartSpec): Raster {
  const width = spec.width ?? 460;
  const height = spec.height ?? 320;
  const img = new Raster(width, height);
  img.textCentered(width / 2, 5, spec.title);

  const xs = spec.series.flatMap((s) => s.x);
  const ys = spec.series.flatMap((s) => s.y).concat((spec.refLines ?? []).map((r) => r[0]));
  const tx = makeScale(xs, Boolean(spec.xLog), ML, width - MR);
  const ty = makeScale(ys, Boolean(spec.yLog), height - MB, MT);

  img.line(ML, MT, ML, height - MB, BLACK);
  img.line(ML, height - MB, width - MR, height - MB, BLACK);

  for (const [value, label] of tx.ticks) {
    const px = tx.map(value);
    img.line(px, height - MB, px, height - MB + 3, BLACK);
    img.textCentered(px, height - MB + 6, label);
  }
  for (const [value, label] of ty.ticks) {
    const py = ty.map(value);
    img.line(ML - 3, py, ML, py, BLACK);
    img.text(2, py - 3, label);
  }
  img.textCentered((ML + width - MR) / 2, height - 13, spec.xLabel);
  img.text(2, 7, spec.yLabel);

  for (const [level, label] of spec.refLines ?? []) {
    const py = ty.map(level);
    for (let x = ML; x < width - MR; x += 4) img.set(x, py, GRAY);
    img.text(ML + 4, py - 9, label, GRAY);
  }

  let legendY = MT + 4;
  for (const s of spec.series) {
    for (let i = 1; i < s.x.length; i++) {
      img.line(tx.map(s.x[i - 1]!), ty.map(s.y[i - 1]!), tx.map(s.x[i]!), ty.map(s.y[i]!),
               s.color);
    }
    if (s.markers ?? true) {
      for (let i = 0; i < s.x.length; i++) {
        const px = tx.map(s.x[i]!);
        const py = ty.map(s.y[i]!);
        img.fillRect(px - 1, py - 1, 3, 3, s.color);
      }
    }
    if (spec.series.length > 1) {
      img.line(width - MR - 60, legendY + 3, width - MR - 46, legendY + 3, s.color);
      img.text(width - MR - 42, legendY, s.label, s.color);
      legendY += 10;
    }
  }
  return img;
}

interface Scale {
  map(v: number): number;
  ticks: Array<[number, string]>;
}

function makeScale(values: number[], log: boolean, p0: number, p1: number): Scale {
  const finite = values.filter((v) => Number.isFinite(v) && (!log || v > 0));
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    lo = log ? 1 : 0;
    hi = log ? 10 : 1;
  }
  if (log) {
    lo = Math.log10(lo);
    hi = Math.log10(hi);
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const map = (v: number) => {
    const t = ((log ? Math.log10(Math.max(v, Number.MIN_VALUE)) : v) - lo) / (hi - lo);
    return p0 + t * (p1 - p0);
  };
  const ticks: Array<[number, string]> = [];
  if (log) {
    for (let d = Math.ceil(lo); d <= Math.floor(hi); d++) {
      ticks.push([10 ** d, d >= 0 && d < 5 ? formatNumber(10 ** d) : `1e${d}`]);
    }
    if (ticks.length < 2) {
      ticks.length = 0;
      for (const t of [lo + pad, hi - pad]) ticks.push([10 ** t, `1e${t.toFixed(1)}`]);
    }
  } else {
    const n = 5;
    for (let i = 0; i <= n; i++) {
      const v = lo + pad + ((hi - lo - 2 * pad) * i) / n;
      ticks.push([v, formatNumber(v)]);
    }
  }
  return { map, ticks };
}
