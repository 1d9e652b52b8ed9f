/** Waveform rendering helpers: sample-exact SVG path mapping on a fixed mV scale. */

export const N_LEADS = 8;
export const SAMPLES_PER_LEAD = 600;

/** Fixed vertical scale: the panel always spans [-MV_SPAN, +MV_SPAN] millivolts. */
export const MV_SPAN = 2.0;

/** Six-level query overlay palette, coldest (q=0) to hottest (q=1). */
export const QUERY_COLORS = [
  "#2166ac",
  "#67a9cf",
  "#d1e5f0",
  "#fddbc7",
  "#ef8a62",
  "#b2182b",
];

export function colorForQuery(q: number): string {
  const idx = Math.min(
    QUERY_COLORS.length - 1,
    Math.max(0, Math.round(q * (QUERY_COLORS.length - 1))),
  );
  return QUERY_COLORS[idx];
}

/** Splits a flat (N_LEADS * SAMPLES_PER_LEAD) signal into per-lead arrays. */
export function splitLeads(signal: number[]): number[][] {
  if (signal.length !== N_LEADS * SAMPLES_PER_LEAD) {
    throw new Error(
      `expected ${N_LEADS * SAMPLES_PER_LEAD} samples, got ${signal.length}`,
    );
  }
  const leads: number[][] = [];
  for (let c = 0; c < N_LEADS; c++) {
    leads.push(signal.slice(c * SAMPLES_PER_LEAD, (c + 1) * SAMPLES_PER_LEAD));
  }
  return leads;
}

export interface Point {
  x: number;
  y: number;
}

/**
 * Maps one lead to pixel points: one point per sample (no resampling),
 * x spread uniformly over the width, y on the fixed mV scale with 0 mV at
 * mid-height and +MV_SPAN at the top.
 */
export function leadToPoints(lead: number[], width: number, height: number): Point[] {
  const n = lead.length;
  const dx = n > 1 ? width / (n - 1) : 0;
  return lead.map((mv, i) => ({
    x: i * dx,
    y: (height / 2) * (1 - mv / MV_SPAN),
  }));
}

/** Renders points to an SVG path string ("M x y L x y ..."). */
export function pointsToPath(points: Point[]): string {
  if (points.length === 0) return "";
  const parts = points.map(
    (p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(2)} ${p.y.toFixed(2)}`,
  );
  return parts.join(" ");
}

export function leadPath(lead: number[], width: number, height: number): string {
  return pointsToPath(leadToPoints(lead, width, height));
}
