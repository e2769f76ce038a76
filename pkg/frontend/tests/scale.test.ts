import { describe, expect, it } from "vitest";
import { fmt, linearScale } from "../src/scale.js";

describe("fmt", () => {
  it("strips fractional zeros only", () => {
    expect(fmt(100, 2)).toBe("100");
    expect(fmt(0.5, 2)).toBe("0.5");
    expect(fmt(18.0, 4)).toBe("18");
    expect(fmt(-0.001, 2)).toBe("0");
    expect(fmt(1.25, 2)).toBe("1.25");
  });
});

describe("linearScale", () => {
  it("maps domain ends onto the range with padding", () => {
    const s = linearScale([0, 10], [0, 100]);
    expect(s.map(0)).toBeGreaterThan(0);
    expect(s.map(10)).toBeLessThan(100);
    expect(s.map(5)).toBeCloseTo(50, 6);
  });

  it("produces round-numbered ticks inside the domain", () => {
    const s = linearScale([17, 53], [0, 100]);
    for (const t of s.ticks) {
      expect(t).toBeGreaterThanOrEqual(s.domain[0]);
      expect(t).toBeLessThanOrEqual(s.domain[1] + 1e-9);
    }
    expect(s.ticks.length).toBeGreaterThanOrEqual(3);
  });

  it("widens degenerate domains", () => {
    const s = linearScale([5, 5], [0, 100]);
    expect(s.domain[0]).toBeLessThan(5);
    expect(s.domain[1]).toBeGreaterThan(5);
  });

  it("rejects non-finite values", () => {
    expect(() => linearScale([1, Infinity], [0, 1])).toThrow(/non-finite/);
  });
});
