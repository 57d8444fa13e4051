/** RGBA raster with the few drawing primitives the figure needs. */

import { RGB } from "./color.js";
import { GLYPH_HEIGHT, GLYPH_SPACING, GLYPH_WIDTH, glyph } from "./font.js";

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array; // RGBA, row-major from the top-left

  constructor(width: number, height: number, fill: RGB = [255, 255, 255]) {
    if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
      throw new Error(`raster size must be positive integers, got ${width}x${height}`);
    }
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4);
    for (let k = 0; k < width * height; k++) {
      this.data[4 * k] = fill[0];
      this.data[4 * k + 1] = fill[1];
      this.data[4 * k + 2] = fill[2];
      this.data[4 * k + 3] = 255;
    }
  }

  set(x: number, y: number, rgb: RGB): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) {
      return; // clip silently: labels near the edge just truncate
    }
    const k = 4 * (y * this.width + x);
    this.data[k] = rgb[0];
    this.data[k + 1] = rgb[1];
    this.data[k + 2] = rgb[2];
    this.data[k + 3] = 255;
  }

  get(x: number, y: number): RGB {
    const k = 4 * (y * this.width + x);
    return [this.data[k], this.data[k + 1], this.data[k + 2]];
  }

  fillRect(x: number, y: number, w: number, h: number, rgb: RGB): void {
    for (let yy = y; yy < y + h; yy++) {
      for (let xx = x; xx < x + w; xx++) {
        this.set(xx, yy, rgb);
      }
    }
  }

  /** 1px Bresenham line, inclusive of both endpoints. */
  line(x1: number, y1: number, x2: number, y2: number, rgb: RGB): void {
    let x = Math.round(x1);
    let y = Math.round(y1);
    const xe = Math.round(x2);
    const ye = Math.round(y2);
    const dx = Math.abs(xe - x);
    const dy = -Math.abs(ye - y);
    const sx = x < xe ? 1 : -1;
    const sy = y < ye ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(x, y, rgb);
      if (x === xe && y === ye) {
        break;
      }
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
}

/** Draw text with its top-left corner at (x, y). */
export function drawText(r: Raster, x: number, y: number, text: string, rgb: RGB, scale = 1): void {
  let cx = x;
  for (const ch of text) {
    const rows = glyph(ch);
    for (let gy = 0; gy < GLYPH_HEIGHT; gy++) {
      for (let gx = 0; gx < GLYPH_WIDTH; gx++) {
        if (rows[gy][gx] === "#") {
          r.fillRect(cx + gx * scale, y + gy * scale, scale, scale, rgb);
        }
      }
    }
    cx += (GLYPH_WIDTH + GLYPH_SPACING) * scale;
  }
}

/** Draw text rotated 90 degrees counter-clockwise, reading bottom to top; (x, y) is the top-left of the rotated block. */
export function drawTextVertical(r: Raster, x: number, y: number, text: string, rgb: RGB, scale = 1): void {
  let cy = y + (text.length * (GLYPH_WIDTH + GLYPH_SPACING) - GLYPH_SPACING) * scale;
  for (const ch of text) {
    const rows = glyph(ch);
    for (let gy = 0; gy < GLYPH_HEIGHT; gy++) {
      for (let gx = 0; gx < GLYPH_WIDTH; gx++) {
        if (rows[gy][gx] === "#") {
          // glyph (gx, gy) -> rotated: x advances with gy, y decreases with gx
          r.fillRect(x + gy * scale, cy - (gx + 1) * scale, scale, scale, rgb);
        }
      }
    }
    cy -= (GLYPH_WIDTH + GLYPH_SPACING) * scale;
  }
}
