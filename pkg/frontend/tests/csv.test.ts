import { describe, expect, it } from "vitest";
import { columnIndex, concatTables, parseCsv } from "../src/csv.js";

describe("parseCsv", () => {
  it("splits header and rows", () => {
    const t = parseCsv("a,b\n1,2\n3,4\n");
    expect(t.columns).toEqual(["a", "b"]);
    expect(t.rows).toEqual([["1", "2"], ["3", "4"]]);
  });

  it("handles quoted fields with commas and escaped quotes", () => {
    const t = parseCsv('name,note\n"x,y","he said ""hi"""\n');
    expect(t.rows[0]).toEqual(["x,y", 'he said "hi"']);
  });

  it("handles CRLF line endings", () => {
    const t = parseCsv("a,b\r\n1,2\r\n");
    expect(t.rows).toEqual([["1", "2"]]);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1\n")).toThrow(/row 2/);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(/empty/);
  });
});

describe("concatTables", () => {
  it("concatenates matching schemas", () => {
    const a = parseCsv("x,y\n1,2\n");
    const b = parseCsv("x,y\n3,4\n");
    expect(concatTables([a, b]).rows).toHaveLength(2);
  });

  it("rejects mismatched schemas", () => {
    const a = parseCsv("x,y\n1,2\n");
    const b = parseCsv("x,z\n3,4\n");
    expect(() => concatTables([a, b])).toThrow(/schema mismatch/);
  });
});

describe("columnIndex", () => {
  it("names the missing column and the alternatives", () => {
    const t = parseCsv("x,y\n1,2\n");
    expect(() => columnIndex(t, "sdr_db")).toThrow(/sdr_db.*x, y/);
  });
});
