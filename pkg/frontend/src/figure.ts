/**
 * Three-panel comparison figure: one panel per gamma, each showing the
 * histogram of that run's samples (log-scaled blues) under the
 * highest-density contours of the exact posterior (oranges). A sampler
 * that mixes well fills every contour; one stuck in a single mode
 * leaves the other contour lobe empty.
 */

import { CompareData, GammaPanel } from "./artifacts.js";
import { AXIS_COLOR, BLUES, CONTOUR_COLORS, TEXT_COLOR, logScale, ramp } from "./color.js";
import { DEFAULT_MASS_FRACTIONS, marchingSquares, massLevels } from "./contours.js";
import { Field, fieldMax, histogram } from "./grid.js";
import { Raster, drawText, drawTextVertical } from "./raster.js";
import { textWidth } from "./font.js";

export interface FigureOptions {
  /** pixels per grid cell (default 4) */
  cell?: number;
  /** oracle mass fractions outlined by contours */
  fractions?: number[];
}

const MARGIN_LEFT = 36;
const MARGIN_RIGHT = 10;
const MARGIN_TOP = 18;
const MARGIN_BOTTOM = 30;
const PANEL_GAP = 14;

/** Tick positions: multiples of a step chosen to give at most ~6 ticks. */
export function tickValues(lo: number, hi: number): number[] {
  const steps = [0.1, 0.2, 0.25, 0.5, 1, 2, 2.5, 5, 10, 20, 25, 50, 100];
  let step = steps[steps.length - 1];
  for (const s of steps) {
    if ((hi - lo) / s <= 6) {
      step = s;
      break;
    }
  }
  const out: number[] = [];
  for (let k = Math.ceil(lo / step - 1e-9); k * step <= hi + 1e-9; k++) {
    out.push(Number((k * step).toFixed(10)));
  }
  return out;
}

function formatNumber(v: number): string {
  return Object.is(v, -0) ? "0" : String(v);
}

function klLabel(panel: GammaPanel): string {
  return panel.kl === null ? "diverged" : `kl = ${panel.kl.toFixed(3)}`;
}

export function renderComparisonFigure(data: CompareData, options: FigureOptions = {}): Raster {
  const cell = options.cell ?? 4;
  if (!Number.isInteger(cell) || cell < 1) {
    throw new Error(`cell size must be a positive integer, got ${cell}`);
  }
  const fractions = options.fractions ?? DEFAULT_MASS_FRACTIONS;
  const geom = data.geom;
  const panelW = geom.bins[0] * cell;
  const panelH = geom.bins[1] * cell;
  const n = data.panels.length;
  const width = MARGIN_LEFT + n * panelW + (n - 1) * PANEL_GAP + MARGIN_RIGHT;
  const height = MARGIN_TOP + panelH + MARGIN_BOTTOM;
  const r = new Raster(width, height);

  const levels = massLevels(data.oracle, fractions);
  // outermost (largest mass, lowest level) first so nested lines overdraw it
  const ordered = fractions
    .map((q, idx) => ({ q, level: levels[idx], color: CONTOUR_COLORS[idx % CONTOUR_COLORS.length] }))
    .sort((a, b) => b.q - a.q);

  const xTicks = tickValues(geom.lower[0], geom.upper[0]);
  const yTicks = tickValues(geom.lower[1], geom.upper[1]);

  data.panels.forEach((panel, p) => {
    const x0 = MARGIN_LEFT + p * (panelW + PANEL_GAP);
    const y0 = MARGIN_TOP;
    const toPxX = (t: number) => x0 + ((t - geom.lower[0]) / (geom.upper[0] - geom.lower[0])) * panelW;
    const toPxY = (t: number) => y0 + panelH - ((t - geom.lower[1]) / (geom.upper[1] - geom.lower[1])) * panelH;

    // sample histogram, log-scaled; empty cells stay background white
    const counts: Field = histogram(geom, panel.samples.theta1, panel.samples.theta2);
    const peak = fieldMax(counts);
    for (let i = 0; i < geom.bins[0]; i++) {
      for (let j = 0; j < geom.bins[1]; j++) {
        const c = counts.values[i * geom.bins[1] + j];
        if (c > 0) {
          r.fillRect(x0 + i * cell, y0 + panelH - (j + 1) * cell, cell, cell, ramp(BLUES, logScale(c, peak)));
        }
      }
    }

    // oracle contours on top
    for (const { level, color } of ordered) {
      for (const seg of marchingSquares(data.oracle, level)) {
        r.line(toPxX(seg.x1), toPxY(seg.y1), toPxX(seg.x2), toPxY(seg.y2), color);
      }
    }

    // border just outside the data area
    r.line(x0 - 1, y0 - 1, x0 + panelW, y0 - 1, AXIS_COLOR);
    r.line(x0 - 1, y0 + panelH, x0 + panelW, y0 + panelH, AXIS_COLOR);
    r.line(x0 - 1, y0 - 1, x0 - 1, y0 + panelH, AXIS_COLOR);
    r.line(x0 + panelW, y0 - 1, x0 + panelW, y0 + panelH, AXIS_COLOR);

    // x ticks and labels on every panel
    for (const t of xTicks) {
      const px = Math.round(toPxX(t));
      r.line(px, y0 + panelH + 1, px, y0 + panelH + 3, AXIS_COLOR);
      const label = formatNumber(t);
      drawText(r, px - Math.floor(textWidth(label) / 2), y0 + panelH + 6, label, TEXT_COLOR);
    }
    drawText(
      r,
      x0 + Math.floor((panelW - textWidth("theta1")) / 2),
      y0 + panelH + 16,
      "theta1",
      TEXT_COLOR
    );

    // y ticks on the leftmost panel only
    if (p === 0) {
      for (const t of yTicks) {
        const py = Math.round(toPxY(t));
        r.line(x0 - 4, py, x0 - 2, py, AXIS_COLOR);
        const label = formatNumber(t);
        drawText(r, x0 - 6 - textWidth(label), py - 3, label, TEXT_COLOR);
      }
      drawTextVertical(
        r,
        2,
        y0 + Math.floor((panelH - textWidth("theta2")) / 2),
        "theta2",
        TEXT_COLOR
      );
    }

    // title and score
    const title = `gamma = ${formatNumber(panel.gamma)}`;
    drawText(r, x0 + Math.floor((panelW - textWidth(title)) / 2), 5, title, TEXT_COLOR);
    drawText(r, x0 + 5, y0 + 5, klLabel(panel), TEXT_COLOR);
  });

  return r;
}
