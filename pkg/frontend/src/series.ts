/**
 * Group bench rows into power-versus-runtime curve series.
 *
 * Default grouping: one series per test, labeled with whichever sweep
 * parameters vary among that test's rows (those values become the points
 * along the curve). An explicit group-by column splits series on that
 * column's value instead.
 */

import { BenchRow, SWEEP_COLUMNS, SchemaError } from "./schema";

export interface CurvePoint {
  runtimeNs: number;
  rate: number;
  wilsonLo: number;
  wilsonHi: number;
  label: string;
}

export interface CurveSeries {
  label: string;
  points: CurvePoint[]; // sorted by runtime, ascending
}

export function groupSeries(rows: BenchRow[], groupBy?: string): CurveSeries[] {
  if (rows.length === 0) {
    throw new SchemaError("no data rows to plot");
  }
  if (groupBy !== undefined && !(SWEEP_COLUMNS as string[]).includes(groupBy) && groupBy !== "n") {
    throw new SchemaError(`cannot group by ${JSON.stringify(groupBy)}`);
  }
  const byKey = new Map<string, BenchRow[]>();
  for (const row of rows) {
    let key = row.test;
    if (groupBy !== undefined) {
      const value = groupBy === "n" ? String(row.n) : row.params[groupBy];
      key = `${row.test} ${groupBy}=${value}`;
    }
    const bucket = byKey.get(key);
    if (bucket) {
      bucket.push(row);
    } else {
      byKey.set(key, [row]);
    }
  }
  const series: CurveSeries[] = [];
  for (const [key, bucket] of byKey) {
    const varying = SWEEP_COLUMNS.filter(
      (c) => new Set(bucket.map((r) => r.params[c])).size > 1,
    );
    const nVaries = new Set(bucket.map((r) => r.n)).size > 1;
    const label =
      groupBy !== undefined || (varying.length === 0 && !nVaries)
        ? key
        : `${key} (${[...varying, ...(nVaries ? ["n"] : [])].join(", ")})`;
    const points = bucket
      .map((r) => ({
        runtimeNs: r.meanNs,
        rate: r.rate,
        wilsonLo: r.wilsonLo,
        wilsonHi: r.wilsonHi,
        label: pointLabel(r, varying, nVaries),
      }))
      .sort((a, b) => a.runtimeNs - b.runtimeNs);
    series.push({ label, points });
  }
  series.sort((a, b) => (a.label < b.label ? -1 : a.label > b.label ? 1 : 0));
  return series;
}

function pointLabel(row: BenchRow, varying: string[], nVaries: boolean): string {
  const parts = varying.map((c) => `${c}=${row.params[c]}`);
  if (nVaries) {
    parts.push(`n=${row.n}`);
  }
  return parts.join(" ");
}
