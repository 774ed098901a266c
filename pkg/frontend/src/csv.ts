/**
 * CSV reading and experiment schema validation.
 *
 * The column lists are the fixed output contracts of the experiment runner;
 * a file whose header deviates is rejected with an explicit column diff.
 */

export interface Table {
  columns: string[];
  rows: string[][];
}

export const EXPERIMENT_COLUMNS: Record<string, string[]> = {
  annealed_gap: ["experiment", "N", "repetition", "trial", "gap_index", "lam", "rho", "gap", "s"],
  quenched_bulk_sampling: [
    "experiment", "N", "repetition", "trial", "gap_index", "lam", "rho", "gap", "s",
  ],
  monoparametric_quenched: [
    "experiment", "arm", "N", "repetition", "trial", "x", "gap_index", "rho", "gap", "s", "rescaling",
  ],
  ks_convergence: ["experiment", "arm", "N", "repetition", "ks", "samples"],
};

export const REFERENCE_COLUMNS = ["s", "p", "cdf", "provenance"];

export class SchemaError extends Error {
  readonly missing: string[];
  readonly unexpected: string[];

  constructor(message: string, missing: string[], unexpected: string[]) {
    super(message);
    this.name = "SchemaError";
    this.missing = missing;
    this.unexpected = unexpected;
  }
}

export class DataError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "DataError";
  }
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new DataError("empty CSV: no header row");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  for (const row of rows) {
    if (row.length !== columns.length) {
      throw new DataError(
        `ragged CSV row: expected ${columns.length} fields, got ${row.length}`,
      );
    }
  }
  return { columns, rows };
}

export function validateColumns(table: Table, expected: string[], label: string): void {
  const have = new Set(table.columns);
  const want = new Set(expected);
  const missing = expected.filter((c) => !have.has(c));
  const unexpected = table.columns.filter((c) => !want.has(c));
  const sameOrder =
    table.columns.length === expected.length &&
    table.columns.every((c, i) => c === expected[i]);
  if (!sameOrder) {
    throw new SchemaError(
      `${label}: header does not match the ${label} schema\n` +
        `  expected: ${expected.join(",")}\n` +
        `  found:    ${table.columns.join(",")}\n` +
        `  missing:  [${missing.join(", ")}]\n` +
        `  unexpected: [${unexpected.join(", ")}]`,
      missing,
      unexpected,
    );
  }
  if (table.rows.length === 0) {
    throw new DataError(`${label}: no data rows`);
  }
}

export function numericColumn(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`missing column '${name}'`, [name], []);
  }
  return table.rows.map((row, k) => {
    const value = Number(row[idx]);
    if (!Number.isFinite(value)) {
      throw new DataError(`non-numeric value '${row[idx]}' in column '${name}', row ${k + 1}`);
    }
    return value;
  });
}

export function stringColumn(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`missing column '${name}'`, [name], []);
  }
  return table.rows.map((row) => row[idx]);
}
