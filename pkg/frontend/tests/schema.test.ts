import { describe, expect, it } from "vitest";

import { BENCH_COLUMNS, parseBenchCsv, SchemaError } from "../src/schema";

const HEADER = BENCH_COLUMNS.join(",");

function row(overrides: Partial<Record<string, string>> = {}): string {
  const base: Record<string, string> = {
    scenario: '"gauss:d=10,shift=0"', test: "ctt", n: "1024", d: "10",
    g: "3", s: "32", B: "39", r: "", block_size: "", ell: "",
    alpha: "0.05", reps: "400", rejections: "21", rate: "0.0525",
    wilson_lo: "0.034", wilson_hi: "0.079", mean_ns: "1200000",
    median_ns: "1100000",
  };
  return BENCH_COLUMNS.map((c) => overrides[c] ?? base[c]).join(",");
}

describe("parseBenchCsv", () => {
  it("parses a well-formed file", () => {
    const rows = parseBenchCsv([HEADER, row(), row({ g: "0" })].join("\n"));
    expect(rows).toHaveLength(2);
    expect(rows[0].test).toBe("ctt");
    expect(rows[0].rate).toBeCloseTo(0.0525, 12);
    expect(rows[0].params.g).toBe("3");
    expect(rows[0].params.r).toBe("");
  });

  it("rejects a wrong header", () => {
    expect(() => parseBenchCsv("a,b,c\n1,2,3")).toThrow(SchemaError);
  });

  it("names the row for a malformed rate", () => {
    const text = [HEADER, row(), row({ rate: "banana" })].join("\n");
    expect(() => parseBenchCsv(text)).toThrow(/row 2: malformed rate/);
  });

  it("rejects out-of-order intervals with the row number", () => {
    const text = [HEADER, row({ wilson_lo: "0.9" })].join("\n");
    expect(() => parseBenchCsv(text)).toThrow(/row 1/);
  });

  it("rejects ragged rows", () => {
    const text = [HEADER, "too,short"].join("\n");
    expect(() => parseBenchCsv(text)).toThrow(/row 1: expected/);
  });
});
