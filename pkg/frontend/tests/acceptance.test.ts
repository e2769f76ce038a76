/**
 * Renders real experiment CSVs (committed fixtures produced by the simulation
 * harness's acceptance runs) into the SDR-vs-SNR and candidate-size figures,
 * and checks byte-stable re-rendering. When fresh acceptance artifacts exist
 * under ../results/acceptance they are rendered too.
 */

import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { runPlot } from "../src/cli.js";
import { DEFAULTS, PlotSpec } from "../src/spec.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURES = join(HERE, "fixtures");
const ARTIFACTS = join(HERE, "..", "..", "results", "acceptance");

function plotSpec(input: string[], out: string,
                  extra: Partial<PlotSpec> = {}): PlotSpec {
  return {
    input,
    groupBy: [...DEFAULTS.groupBy],
    x: DEFAULTS.x,
    y: DEFAULTS.y,
    out,
    overlays: [],
    ...extra,
  };
}

function renderTwice(spec: PlotSpec, dir: string, name: string) {
  const first = join(dir, `${name}-1.svg`);
  const second = join(dir, `${name}-2.svg`);
  runPlot({ ...spec, out: first });
  runPlot({ ...spec, out: second });
  const a = readFileSync(first, "utf-8");
  expect(a).toBe(readFileSync(second, "utf-8"));
  return a;
}

describe("figure generation from harness results", () => {
  const dir = mkdtempSync(join(tmpdir(), "dqlc-plots-"));

  it("renders the memoryless SDR sweep with labeled axes", () => {
    const svg = renderTwice(
      plotSpec([join(FIXTURES, "memoryless_k3.csv")], "", {
        title: "K=3, rho=0.95, memoryless decoding",
      }),
      dir, "memoryless",
    );
    expect(svg).toContain("SNR (dB)");
    expect(svg).toContain("SDR (dB)");
    expect(svg).toContain("dqlc-memoryless");
    expect(svg).toContain("linear-memoryless");
  });

  it("renders the temporal-correlation comparison from two CSVs", () => {
    const svg = renderTwice(
      plotSpec(
        [join(FIXTURES, "kf_rho99.csv"), join(FIXTURES, "kf_rho90.csv")],
        "",
        { groupBy: ["scheme", "rho"], title: "KF decoding gain" },
      ),
      dir, "kf",
    );
    expect(svg).toContain("dqlc-kf / 0.99");
    expect(svg).toContain("dqlc-memoryless / 0.9");
  });

  it("renders the candidate-size figure against correlation", () => {
    const svg = renderTwice(
      plotSpec([join(FIXTURES, "candidates.csv")], "", {
        x: "rho",
        y: "avg_candidates",
        groupBy: ["K"],
        title: "sphere-decoder candidate economy",
      }),
      dir, "candidates",
    );
    expect(svg).toContain("mean candidate-set size");
    expect(svg).toContain("spatial correlation");
  });

  it("renders fresh acceptance artifacts when present", () => {
    const fresh = join(ARTIFACTS, "memoryless_k3.csv");
    if (!existsSync(fresh)) {
      return; // fixtures above already cover the rendering contract
    }
    const svg = renderTwice(plotSpec([fresh], ""), dir, "fresh");
    expect(svg).toContain("SDR (dB)");
  });
});
