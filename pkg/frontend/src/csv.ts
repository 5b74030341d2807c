/**
 * Minimal CSV reader for the harness outputs: a header line of column names
 * followed by rows of finite floats.  Schema violations are reported with
 * 1-based row numbers.
 */

export interface Table {
  columns: string[];
  rows: number[][];
}

export class SchemaError extends Error {}

export function parseCsv(text: string, requiredColumns: string[] = []): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length < 2) {
    throw new SchemaError("CSV needs a header line and at least one data row");
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  for (const col of requiredColumns) {
    if (!columns.includes(col)) {
      throw new SchemaError(`missing required column '${col}'`);
    }
  }
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new SchemaError(
        `row ${i + 1}: expected ${columns.length} fields, got ${parts.length}`,
      );
    }
    const row = parts.map((p) => Number(p));
    const bad = row.findIndex((v) => Number.isNaN(v));
    if (bad >= 0) {
      throw new SchemaError(
        `row ${i + 1}: field '${columns[bad]}' is not a number: '${parts[bad]}'`,
      );
    }
    rows.push(row);
  }
  return { columns, rows };
}

export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`unknown column '${name}'`);
  }
  return table.rows.map((r) => r[idx]);
}

/** Column accessor that warns (once) on unknown names instead of throwing. */
export function optionalColumn(table: Table, name: string): number[] | null {
  return table.columns.includes(name) ? column(table, name) : null;
}
