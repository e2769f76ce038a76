/** Linear scales and tick placement with deterministic formatting. */

export interface Scale {
  domain: [number, number];
  range: [number, number];
  map: (v: number) => number;
  ticks: number[];
}

/** Round-numbered tick step covering the span with ~targetCount ticks. */
function niceStep(span: number, targetCount: number): number {
  const raw = span / Math.max(targetCount, 1);
  const power = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const mult of [1, 2, 5, 10]) {
    if (mult * power >= raw) return mult * power;
  }
  return 10 * power;
}

export function linearScale(
  values: number[],
  range: [number, number],
  targetTicks = 6,
): Scale {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    throw new Error("scale domain contains non-finite values");
  }
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const step = niceStep(hi - lo, targetTicks);
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let t = first; t <= hi + 1e-9 * step; t += step) {
    ticks.push(Math.abs(t) < 1e-12 ? 0 : t);
  }
  const map = (v: number) =>
    range[0] + ((v - lo) / (hi - lo)) * (range[1] - range[0]);
  return { domain: [lo, hi], range, map, ticks };
}

/** Stable decimal formatting (no exponent) for coordinates and ticks. */
export function fmt(v: number, decimals = 2): string {
  const s = v.toFixed(decimals);
  // strip trailing fractional zeros (never digits of the integer part),
  // then a dangling point, and normalize negative zero
  const trimmed = s.replace(/(\.\d*?)0+$/, "$1").replace(/\.$/, "");
  return trimmed === "-0" ? "0" : trimmed;
}
