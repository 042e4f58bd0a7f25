/** RGB pixel buffer with the drawing primitives the figure code needs. */

import { GLYPH_H, GLYPH_W, glyph, textWidth } from "./font.js";
import { encodePng } from "./png.js";

export type Color = readonly [number, number, number];

export const WHITE: Color = [255, 255, 255];
export const BLACK: Color = [20, 20, 20];
export const GRAY: Color = [170, 170, 170];
export const LIGHT: Color = [235, 235, 235];

export class Raster {
  readonly data: Uint8Array;

  constructor(readonly width: number, readonly height: number, fill: Color = WHITE) {
    this.data = new Uint8Array(width * height * 3);
    for (let i = 0; i < width * height; i++) this.data.set(fill, i * 3);
  }

  set(x: number, y: number, c: Color): void {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    this.data.set(c, (y * this.width + x) * 3);
  }

  fillRect(x0: number, y0: number, w: number, h: number, c: Color): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) this.set(x, y, c);
    }
  }

  line(x0: number, y0: number, x1: number, y1: number, c: Color): void {
    // Bresenham on rounded endpoints
    let x = Math.round(x0);
    let y = Math.round(y0);
    const ex = Math.round(x1);
    const ey = Math.round(y1);
    const dx = Math.abs(ex - x);
    const dy = -Math.abs(ey - y);
    const sx = x < ex ? 1 : -1;
    const sy = y < ey ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(x, y, c);
      if (x === ex && y === ey) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  text(x: number, y: number, s: string, c: Color = BLACK): void {
    let cx = Math.round(x);
    const cy = Math.round(y);
    for (const ch of s) {
      const rows = glyph(ch);
      for (let gy = 0; gy < GLYPH_H; gy++) {
        const bits = rows[gy]!;
        for (let gx = 0; gx < GLYPH_W; gx++) {
          if (bits & (1 << (GLYPH_W - 1 - gx))) this.set(cx + gx, cy + gy, c);
        }
      }
      cx += GLYPH_W + 1;
    }
  }

  textCentered(cx: number, y: number, s: string, c: Color = BLACK): void {
    this.text(cx - textWidth(s) / 2, y, s, c);
  }

  png(): Buffer {
    return encodePng(this.width, this.height, this.data);
  }
}
