/** Curve assembly and SVG emission for harness result tables. */

import { columnIndex, Table } from "./csv.js";
import { fmt, linearScale } from "./scale.js";
import { PlotSpec } from "./spec.js";

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 64, right: 180, top: 40, bottom: 52 };

const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#17becf", "#7f7f7f",
];

const MARKERS = ["circle", "square", "diamond", "triangle"] as const;

// Checked-in figure style; inlined so the SVG is self-contained.
export const STYLE = `
  text { font-family: 'DejaVu Sans', 'Helvetica', sans-serif; fill: #222; }
  .title { font-size: 15px; font-weight: bold; }
  .axis-label { font-size: 13px; }
  .tick-label { font-size: 11px; }
  .legend-label { font-size: 12px; }
  .grid { stroke: #dddddd; stroke-width: 1; }
  .axis { stroke: #222222; stroke-width: 1.2; }
  .curve { fill: none; stroke-width: 1.8; }
  .overlay { stroke: #444444; stroke-width: 1.4; }
`;

interface Curve {
  label: string;
  points: Array<[number, number]>;
}

/** Group rows into one sorted curve per distinct group-by value tuple. */
export function buildCurves(table: Table, spec: PlotSpec): Curve[] {
  const xi = columnIndex(table, spec.x);
  const yi = columnIndex(table, spec.y);
  const gi = spec.groupBy.map((g) => columnIndex(table, g));
  const groups = new Map<string, Array<[number, number]>>();
  for (const row of table.rows) {
    const key = gi.map((i) => row[i]).join(" / ");
    const x = Number(row[xi]);
    const y = Number(row[yi]);
    if (!Number.isFinite(x) || !Number.isFinite(y)) {
      throw new Error(
        `non-numeric value in columns ${spec.x}/${spec.y}: '${row[xi]}', '${row[yi]}'`,
      );
    }
    if (!groups.has(key)) groups.set(key, []);
    groups.get(key)!.push([x, y]);
  }
  return [...groups.keys()].sort().map((label) => ({
    label,
    points: groups.get(label)!.slice().sort((a, b) => a[0] - b[0]),
  }));
}

function marker(kind: (typeof MARKERS)[number], x: number, y: number,
                color: string): string {
  const r = 3.5;
  const p = (vx: number, vy: number) => `${fmt(vx)},${fmt(vy)}`;
  switch (kind) {
    case "circle":
      return `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${color}"/>`;
    case "square":
      return `<rect x="${fmt(x - r)}" y="${fmt(y - r)}" width="${2 * r}" height="${2 * r}" fill="${color}"/>`;
    case "diamond":
      return `<polygon points="${p(x, y - r - 1)} ${p(x + r + 1, y)} ${p(x, y + r + 1)} ${p(x - r - 1, y)}" fill="${color}"/>`;
    case "triangle":
      return `<polygon points="${p(x, y - r - 1)} ${p(x + r, y + r)} ${p(x - r, y + r)}" fill="${color}"/>`;
  }
}

/** Render the spec against a loaded table into an SVG string. */
export function renderSvg(table: Table, spec: PlotSpec): string {
  const curves = buildCurves(table, spec);
  if (curves.length === 0) {
    throw new Error("no rows to plot");
  }
  const xs = curves.flatMap((c) => c.points.map((p) => p[0]))
    .concat(spec.overlays.map((o) => o.x));
  const ys = curves.flatMap((c) => c.points.map((p) => p[1]))
    .concat(spec.overlays.map((o) => o.y));
  const sx = linearScale(xs, [MARGIN.left, WIDTH - MARGIN.right]);
  const sy = linearScale(ys, [HEIGHT - MARGIN.bottom, MARGIN.top]);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<style>${STYLE}</style>`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
  );
  // grid and ticks
  for (const t of sx.ticks) {
    const x = fmt(sx.map(t));
    parts.push(
      `<line class="grid" x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${HEIGHT - MARGIN.bottom}"/>`,
      `<text class="tick-label" x="${x}" y="${HEIGHT - MARGIN.bottom + 16}" text-anchor="middle">${fmt(t, 4)}</text>`,
    );
  }
  for (const t of sy.ticks) {
    const y = fmt(sy.map(t));
    parts.push(
      `<line class="grid" x1="${MARGIN.left}" y1="${y}" x2="${WIDTH - MARGIN.right}" y2="${y}"/>`,
      `<text class="tick-label" x="${MARGIN.left - 8}" y="${y}" text-anchor="end" dominant-baseline="middle">${fmt(t, 4)}</text>`,
    );
  }
  // axes
  parts.push(
    `<line class="axis" x1="${MARGIN.left}" y1="${HEIGHT - MARGIN.bottom}" x2="${WIDTH - MARGIN.right}" y2="${HEIGHT - MARGIN.bottom}"/>`,
    `<line class="axis" x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${HEIGHT - MARGIN.bottom}"/>`,
  );
  // labels and title
  const xLabel = spec.xLabel ?? defaultLabel(spec.x);
  const yLabel = spec.yLabel ?? defaultLabel(spec.y);
  const midX = (MARGIN.left + WIDTH - MARGIN.right) / 2;
  const midY = (MARGIN.top + HEIGHT - MARGIN.bottom) / 2;
  parts.push(
    `<text class="axis-label" x="${fmt(midX)}" y="${HEIGHT - 12}" text-anchor="middle">${escapeXml(xLabel)}</text>`,
    `<text class="axis-label" x="18" y="${fmt(midY)}" text-anchor="middle" transform="rotate(-90 18 ${fmt(midY)})">${escapeXml(yLabel)}</text>`,
  );
  if (spec.title) {
    parts.push(
      `<text class="title" x="${fmt(midX)}" y="24" text-anchor="middle">${escapeXml(spec.title)}</text>`,
    );
  }
  // curves with markers
  curves.forEach((curve, ci) => {
    const color = PALETTE[ci % PALETTE.length];
    const kind = MARKERS[ci % MARKERS.length];
    const pts = curve.points
      .map(([x, y]) => `${fmt(sx.map(x))},${fmt(sy.map(y))}`)
      .join(" ");
    parts.push(`<polyline class="curve" stroke="${color}" points="${pts}"/>`);
    for (const [x, y] of curve.points) {
      parts.push(marker(kind, sx.map(x), sy.map(y), color));
    }
  });
  // overlays
  for (const o of spec.overlays) {
    const x = sx.map(o.x);
    const y = sy.map(o.y);
    parts.push(
      `<line class="overlay" x1="${fmt(x - 5)}" y1="${fmt(y)}" x2="${fmt(x + 5)}" y2="${fmt(y)}"/>`,
      `<line class="overlay" x1="${fmt(x)}" y1="${fmt(y - 5)}" x2="${fmt(x)}" y2="${fmt(y + 5)}"/>`,
    );
    if (o.label) {
      parts.push(
        `<text class="tick-label" x="${fmt(x + 8)}" y="${fmt(y - 6)}">${escapeXml(o.label)}</text>`,
      );
    }
  }
  // legend
  const lx = WIDTH - MARGIN.right + 14;
  curves.forEach((curve, ci) => {
    const color = PALETTE[ci % PALETTE.length];
    const kind = MARKERS[ci % MARKERS.length];
    const ly = MARGIN.top + 10 + 22 * ci;
    parts.push(
      `<line class="curve" stroke="${color}" x1="${lx}" y1="${ly}" x2="${lx + 26}" y2="${ly}"/>`,
      marker(kind, lx + 13, ly, color),
      `<text class="legend-label" x="${lx + 32}" y="${ly + 4}">${escapeXml(curve.label)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function defaultLabel(column: string): string {
  switch (column) {
    case "eta_db":
      return "SNR (dB)";
    case "sdr_db":
      return "SDR (dB)";
    case "avg_candidates":
      return "mean candidate-set size";
    case "rho":
      return "spatial correlation";
    default:
      return column;
  }
}

function escapeXml(s: string): string {
  return s
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
