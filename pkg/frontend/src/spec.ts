/** Plot specification: which CSVs, which columns, where the image goes. */

export interface OverlayPoint {
  x: number;
  y: number;
  label?: string;
}

export interface PlotSpec {
  /** One or more harness CSV files; schemas must match. */
  input: string[];
  /** Columns whose joint values define one curve (default: ["scheme"]). */
  groupBy: string[];
  /** X column (default eta_db). */
  x: string;
  /** Y column: sdr_db or avg_candidates (any numeric column accepted). */
  y: string;
  /** Output SVG path. */
  out: string;
  title?: string;
  xLabel?: string;
  yLabel?: string;
  /** Reference points drawn as crosses with optional labels. */
  overlays: OverlayPoint[];
}

export const DEFAULTS = {
  groupBy: ["scheme"],
  x: "eta_db",
  y: "sdr_db",
};

function asStringArray(value: unknown, what: string): string[] {
  if (typeof value === "string") return [value];
  if (Array.isArray(value) && value.every((v) => typeof v === "string")) {
    return value as string[];
  }
  throw new Error(`${what} must be a string or array of strings`);
}

/** Build a validated spec from parsed JSON. */
export function specFromJson(data: unknown): PlotSpec {
  if (typeof data !== "object" || data === null) {
    throw new Error("plot spec must be a JSON object");
  }
  const obj = data as Record<string, unknown>;
  const known = new Set([
    "input", "groupBy", "x", "y", "out", "title", "xLabel", "yLabel",
    "overlays",
  ]);
  for (const key of Object.keys(obj)) {
    if (!known.has(key)) throw new Error(`unknown plot spec key '${key}'`);
  }
  if (obj.input === undefined) throw new Error("plot spec needs 'input'");
  if (obj.out === undefined) throw new Error("plot spec needs 'out'");
  const overlays: OverlayPoint[] = [];
  if (obj.overlays !== undefined) {
    if (!Array.isArray(obj.overlays)) throw new Error("'overlays' must be an array");
    for (const item of obj.overlays) {
      const o = item as Record<string, unknown>;
      if (typeof o.x !== "number" || typeof o.y !== "number") {
        throw new Error("overlay points need numeric 'x' and 'y'");
      }
      overlays.push({
        x: o.x,
        y: o.y,
        label: typeof o.label === "string" ? o.label : undefined,
      });
    }
  }
  return {
    input: asStringArray(obj.input, "'input'"),
    groupBy: obj.groupBy === undefined ? DEFAULTS.groupBy
      : asStringArray(obj.groupBy, "'groupBy'"),
    x: typeof obj.x === "string" ? obj.x : DEFAULTS.x,
    y: typeof obj.y === "string" ? obj.y : DEFAULTS.y,
    out: String(obj.out),
    title: typeof obj.title === "string" ? obj.title : undefined,
    xLabel: typeof obj.xLabel === "string" ? obj.xLabel : undefined,
    yLabel: typeof obj.yLabel === "string" ? obj.yLabel : undefined,
    overlays,
  };
}
