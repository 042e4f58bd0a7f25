/** Per-species density heatmaps with the domain outline. */

import type { FieldsTable } from "./artifacts.js";
import { viridis } from "./colormap.js";
import { BLACK, LIGHT, Raster, WHITE } from "./raster.js";

const MARGIN = 24;
const TITLE_H = 14;
const BAR_W = 12;
const BAR_GAP = 10;

/**
 * Renders species `sp` of a fields table. The color scale is fixed to
 * [0, capacity] so figures are comparable across stages and runs.
 */
export function renderHeatmap(
  table: FieldsTable,
  sp: number,
  capacity: number,
  title: string,
): Raster {
  const cell = Math.max(2, Math.ceil(360 / table.nx));
  const plotW = table.nx * cell;
  const plotH = table.ny * cell;
  const width = MARGIN + plotW + BAR_GAP + BAR_W + 40;
  const height = TITLE_H + plotH + MARGIN;
  const img = new Raster(width, height);
  img.textCentered(MARGIN + plotW / 2, 3, title);

  const x0 = MARGIN;
  const y0 = TITLE_H;
  const vals = table.values[sp]!;
  for (let iy = 0; iy < table.ny; iy++) {
    for (let ix = 0; ix < table.nx; ix++) {
      const v = vals[iy * table.nx + ix]!;
      // image rows grow downward, grid rows upward
      const py = y0 + (table.ny - 1 - iy) * cell;
      const px = x0 + ix * cell;
      const color = Number.isNaN(v) ? LIGHT : viridis(v / capacity);
      img.fillRect(px, py, cell, cell, color);
    }
  }

  // domain outline: edges between inside and outside cells
  const inside = (ix: number, iy: number) =>
    ix >= 0 && iy >= 0 && ix < table.nx && iy < table.ny &&
    table.labels[iy * table.nx + ix]! >= 0;
  for (let iy = 0; iy < table.ny; iy++) {
    for (let ix = 0; ix < table.nx; ix++) {
      if (!inside(ix, iy)) continue;
      const px = x0 + ix * cell;
      const py = y0 + (table.ny - 1 - iy) * cell;
      if (!inside(ix - 1, iy)) img.line(px, py, px, py + cell - 1, BLACK);
      if (!inside(ix + 1, iy)) img.line(px + cell - 1, py, px + cell - 1, py + cell - 1, BLACK);
      if (!inside(ix, iy + 1)) img.line(px, py, px + cell - 1, py, BLACK);
      if (!inside(ix, iy - 1)) img.line(px, py + cell - 1, px + cell - 1, py + cell - 1, BLACK);
    }
  }

  // color bar
  const bx = x0 + plotW + BAR_GAP;
  for (let i = 0; i < plotH; i++) {
    const t = 1 - i / (plotH - 1);
    const c = viridis(t);
    for (let dx = 0; dx < BAR_W; dx++) img.set(bx + dx, y0 + i, c);
  }
  img.text(bx + BAR_W + 3, y0, formatNumber(capacity));
  img.text(bx + BAR_W + 3, y0 + plotH - 7, "0");
  return img;
}

export function formatNumber(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    const s = v.toPrecision(3);
    return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
  }
  return v.toExponential(1).replace("e+", "e");
}

export { WHITE };
