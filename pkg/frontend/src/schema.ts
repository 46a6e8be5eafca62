/**
 * Bench CSV schema: parsing and validation with row-numbered errors.
 */

export const BENCH_COLUMNS = [
  "scenario", "test", "n", "d", "g", "s", "B", "r", "block_size", "ell",
  "alpha", "reps", "rejections", "rate", "wilson_lo", "wilson_hi",
  "mean_ns", "median_ns",
] as const;

export type BenchColumn = (typeof BENCH_COLUMNS)[number];

/** Parameter columns that may sweep within one file. */
export const SWEEP_COLUMNS: BenchColumn[] = ["g", "B", "r", "block_size", "ell"];

export interface BenchRow {
  scenario: string;
  test: string;
  n: number;
  params: Record<string, string>; // raw sweep-column cells, "" when unused
  rate: number;
  wilsonLo: number;
  wilsonHi: number;
  meanNs: number;
  medianNs: number;
  row: number; // 1-based data row number, for error messages
}

export class SchemaError extends Error {}

/** Split one CSV line, honoring double-quoted fields with "" escapes. */
export function splitCsvLine(line: string, row: number): string[] {
  const cells: string[] = [];
  let cell = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          cell += '"';
          i++;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
    } else if (ch === '"' && cell === "") {
      quoted = true;
    } else if (ch === ",") {
      cells.push(cell);
      cell = "";
    } else {
      cell += ch;
    }
  }
  if (quoted) {
    throw new SchemaError(`row ${row}: unterminated quoted field`);
  }
  cells.push(cell);
  return cells;
}

function parseNumber(cell: string, column: string, row: number): number {
  const value = Number(cell);
  if (cell.trim() === "" || !Number.isFinite(value)) {
    throw new SchemaError(`row ${row}: malformed ${column} column: ${JSON.stringify(cell)}`);
  }
  return value;
}

export function parseBenchCsv(text: string): BenchRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV");
  }
  const header = splitCsvLine(lines[0], 0);
  if (header.length !== BENCH_COLUMNS.length
      || header.some((h, i) => h !== BENCH_COLUMNS[i])) {
    throw new SchemaError(`unexpected header: ${lines[0]}`);
  }
  const rows: BenchRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = splitCsvLine(lines[i], i);
    if (cells.length !== BENCH_COLUMNS.length) {
      throw new SchemaError(`row ${i}: expected ${BENCH_COLUMNS.length} cells, got ${cells.length}`);
    }
    const cell = (name: BenchColumn) => cells[BENCH_COLUMNS.indexOf(name)];
    const params: Record<string, string> = {};
    for (const name of SWEEP_COLUMNS) {
      params[name] = cell(name);
    }
    const row: BenchRow = {
      scenario: cell("scenario"),
      test: cell("test"),
      n: parseNumber(cell("n"), "n", i),
      params,
      rate: parseNumber(cell("rate"), "rate", i),
      wilsonLo: parseNumber(cell("wilson_lo"), "wilson_lo", i),
      wilsonHi: parseNumber(cell("wilson_hi"), "wilson_hi", i),
      meanNs: parseNumber(cell("mean_ns"), "mean_ns", i),
      medianNs: parseNumber(cell("median_ns"), "median_ns", i),
      row: i,
    };
    if (row.rate < 0 || row.rate > 1 || row.wilsonLo > row.rate || row.wilsonHi < row.rate) {
      throw new SchemaError(`row ${i}: rate/interval out of order`);
    }
    if (row.meanNs <= 0) {
      throw new SchemaError(`row ${i}: nonpositive runtime`);
    }
    rows.push(row);
  }
  return rows;
}
