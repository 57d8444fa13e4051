/** Color ramps and scaling for the histogram panels. */

export type RGB = [number, number, number];

// ColorBrewer "Blues" anchors, light to dark; zero-count cells stay white.
export const BLUES: RGB[] = [
  [247, 251, 255],
  [222, 235, 247],
  [198, 219, 239],
  [158, 202, 225],
  [107, 174, 214],
  [66, 146, 198],
  [33, 113, 181],
  [8, 81, 156],
  [8, 48, 107],
];

// Orange family for nested highest-density contours, outermost first.
export const CONTOUR_COLORS: RGB[] = [
  [127, 39, 4],
  [166, 54, 3],
  [217, 72, 1],
  [241, 105, 19],
];

export const AXIS_COLOR: RGB = [60, 60, 60];
export const TEXT_COLOR: RGB = [20, 20, 20];
export const WHITE: RGB = [255, 255, 255];

/** Piecewise-linear interpolation through the ramp at t in [0, 1]. */
export function ramp(stops: RGB[], t: number): RGB {
  if (stops.length < 2) {
    throw new Error("ramp needs at least two stops");
  }
  const x = Math.min(1, Math.max(0, t)) * (stops.length - 1);
  const k = Math.min(stops.length - 2, Math.floor(x));
  const f = x - k;
  const lo = stops[k];
  const hi = stops[k + 1];
  return [
    Math.round(lo[0] + f * (hi[0] - lo[0])),
    Math.round(lo[1] + f * (hi[1] - lo[1])),
    Math.round(lo[2] + f * (hi[2] - lo[2])),
  ];
}

/**
 * Log scaling for counts: 0 stays 0, the max maps to 1. Keeps sparse
 * tails visible next to peak cells thousands of counts high.
 */
export function logScale(count: number, max: number): number {
  if (count <= 0 || max <= 0) {
    return 0;
  }
  return Math.log1p(count) / Math.log1p(max);
}
