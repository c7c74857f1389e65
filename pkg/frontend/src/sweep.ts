/** Threshold sweep chart.
 *
 * Renders a flagged-count-vs-threshold profile as an inline SVG string.
 * Counts come straight from the profile payload; the only arithmetic here
 * is pixel placement. Clicking a marker prefills the override form with
 * that grid threshold, so each marker carries its tau as a data attribute
 * spelled from the payload value.
 */

import type { SweepProfile } from "./types.js";

export interface ChartPoint {
  x: number;
  y: number;
  tau: number;
  count: number;
}

export interface ChartLayout {
  width: number;
  height: number;
  pad: number;
  points: ChartPoint[];
  maxCount: number;
}

export function chartLayout(profile: SweepProfile, width = 480, height = 160, pad = 24): ChartLayout {
  const grid = profile.grid;
  const counts = profile.flagged_counts;
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const maxCount = Math.max(1, ...counts);
  const span = grid.length > 1 ? (grid[grid.length - 1] as number) - (grid[0] as number) : 1;
  const points = grid.map((tau, i) => {
    const count = counts[i] ?? 0;
    const frac = span === 0 ? 0 : (tau - (grid[0] as number)) / span;
    return {
      x: pad + frac * innerW,
      y: pad + (1 - count / maxCount) * innerH,
      tau,
      count,
    };
  });
  return { width, height, pad, points, maxCount };
}

export function renderSweepChart(profile: SweepProfile, width = 480, height = 160): string {
  const layout = chartLayout(profile, width, height);
  const path = layout.points.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" ");
  const markers = layout.points
    .map(
      (p) =>
        `<circle class="sweep-point" cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="4" data-tau="${p.tau}" data-count="${p.count}"><title>tau ${p.tau}: ${p.count} flagged</title></circle>`,
    )
    .join("");
  const first = profile.grid[0];
  const last = profile.grid[profile.grid.length - 1];
  return `<svg class="sweep-chart" viewBox="0 0 ${width} ${height}" role="img" aria-label="flagged count by threshold">
  <polyline points="${path}" fill="none" stroke="currentColor" stroke-width="1.5"/>
  ${markers}
  <text x="${layout.pad}" y="${height - 4}" class="axis-label">${first}</text>
  <text x="${width - layout.pad}" y="${height - 4}" class="axis-label" text-anchor="end">${last}</text>
  <text x="4" y="${layout.pad}" class="axis-label">${layout.maxCount}</text>
</svg>`;
}

/** Grid threshold nearest to a click at pixel offset x. */
export function tauFromClick(profile: SweepProfile, offsetX: number, width = 480, pad = 24): number {
  const layout = chartLayout(profile, width, 160, pad);
  let best = layout.points[0];
  if (best === undefined) throw new Error("sweep profile has an empty grid");
  for (const p of layout.points) {
    if (Math.abs(p.x - offsetX) < Math.abs(best.x - offsetX)) best = p;
  }
  return best.tau;
}
