/** Hop colors: a fixed categorical palette with a reserved color for hop 0. */

import type { ScatterPoint } from "./types.js";

export const CORE_COLOR = "#d62728";
export const SELECTION_COLOR = "#f2c200";

const HOP_COLORS = [
  "#1f77b4",
  "#2ca02c",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#17becf",
  "#bcbd22",
  "#7f7f7f",
];

export function colorForHop(hop: number): string {
  if (hop === 0) {
    return CORE_COLOR;
  }
  return HOP_COLORS[(hop - 1) % HOP_COLORS.length];
}

export interface LegendEntry {
  hop: number;
  label: string;
  color: string;
}

export function legendEntries(points: readonly ScatterPoint[]): LegendEntry[] {
  const hops = [...new Set(points.map((p) => p.hop))].sort((a, b) => a - b);
  return hops.map((hop) => ({
    hop,
    label: hop === 0 ? "hop 0 (core)" : `hop ${hop}`,
    color: colorForHop(hop),
  }));
}
