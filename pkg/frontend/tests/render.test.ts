import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { describe, expect, it } from "vitest";

import { renderFile, main } from "../src/render";
import { splitCsvLine } from "../src/schema";

const FIXTURE = join(__dirname, "..", "fixtures", "power_runtime.csv");

function attr(tag: string, name: string): string {
  const m = tag.match(new RegExp(`${name}="([^"]*)"`));
  if (!m) throw new Error(`missing ${name} in ${tag}`);
  return m[1];
}

describe("renderFile on the benchmark fixture", () => {
  // structural golden check: series per test, error bars per point,
  // monotone x within each series
  it("renders one series per test with per-point error bars", () => {
    const dir = mkdtempSync(join(tmpdir(), "render-"));
    const out = join(dir, "fig.svg");
    renderFile(FIXTURE, out, { title: "scaling sweep" });
    const svg = readFileSync(out, "utf-8");
    expect(svg.startsWith("<svg ")).toBe(true);

    const csv = readFileSync(FIXTURE, "utf-8").trim().split("\n");
    const testColumn = splitCsvLine(csv[0], 0).indexOf("test");
    const tests = new Set(csv.slice(1).map((l, i) => splitCsvLine(l, i + 1)[testColumn]));

    const seriesBlocks = svg.split(`<g class="series"`).slice(1);
    expect(seriesBlocks.length).toBe(tests.size);

    for (const block of seriesBlocks) {
      const points = block.split("\n").filter((l) => l.includes(`class="point"`));
      const bars = block.split("\n").filter((l) => l.includes(`class="errorbar"`));
      expect(points.length).toBeGreaterThan(0);
      expect(bars.length).toBe(points.length);
      const xs = points.map((p) => Number(attr(p, "cx")));
      for (let i = 1; i < xs.length; i++) {
        expect(xs[i]).toBeGreaterThanOrEqual(xs[i - 1]);
      }
    }
  });

  it("is byte-identical across repeated renders", () => {
    const dir = mkdtempSync(join(tmpdir(), "render-"));
    const a = join(dir, "a.svg");
    const b = join(dir, "b.svg");
    renderFile(FIXTURE, a);
    renderFile(FIXTURE, b);
    expect(readFileSync(a, "utf-8")).toBe(readFileSync(b, "utf-8"));
  });
});

describe("main", () => {
  it("reports schema violations with exit 1", () => {
    const dir = mkdtempSync(join(tmpdir(), "render-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "not,a,bench,file\n1,2,3,4\n");
    expect(main([bad, join(dir, "out.svg")])).toBe(1);
  });

  it("rejects unknown flags with exit 2", () => {
    expect(main(["a.csv", "b.svg", "--frobnicate"])).toBe(2);
  });

  it("requires exactly two positionals", () => {
    expect(main(["only.csv"])).toBe(2);
  });

  it("renders the fixture end to end with a title", () => {
    const dir = mkdtempSync(join(tmpdir(), "render-"));
    const out = join(dir, "fig.svg");
    expect(main([FIXTURE, out, "--title", "power vs runtime"])).toBe(0);
    expect(readFileSync(out, "utf-8")).toContain("power vs runtime");
  });
});
