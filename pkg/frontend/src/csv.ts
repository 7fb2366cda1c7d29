/** Strict CSV tables: one header line, numeric rows. */

export interface Table {
  header: string[];
  /** column-major numeric data, columns[i].length === row count */
  columns: number[][];
}

export class SchemaError extends Error {}

export function parseCsv(text: string, source = "<csv>"): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${source}: empty file`);
  }
  const header = lines[0].split(",").map((h) => h.trim());
  const columns: number[][] = header.map(() => []);
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== header.length) {
      throw new SchemaError(
        `${source}:${i + 1}: ${parts.length} fields, expected ${header.length}`,
      );
    }
    for (let c = 0; c < header.length; c++) {
      const v = Number(parts[c]);
      if (Number.isNaN(v) && parts[c].trim() !== "nan") {
        throw new SchemaError(
          `${source}:${i + 1}: column '${header[c]}' is not numeric: '${parts[c]}'`,
        );
      }
      columns[c].push(v);
    }
  }
  return { header, columns };
}

export function toCsv(table: Table): string {
  const rows = table.columns.length > 0 ? table.columns[0].length : 0;
  const out: string[] = [table.header.join(",")];
  for (let r = 0; r < rows; r++) {
    out.push(table.columns.map((c) => formatG17(c[r])).join(","));
  }
  return out.join("\n") + "\n";
}

/** Shortest representation that round-trips a float64 exactly. */
export function formatG17(x: number): string {
  if (Number.isInteger(x) && Math.abs(x) < 1e15) return String(x);
  let s = String(x);
  if (Number(s) === x) return s;
  return x.toPrecision(17);
}

export function column(table: Table, name: string, source = "<csv>"): number[] {
  const k = table.header.indexOf(name);
  if (k < 0) {
    throw new SchemaError(
      `${source}: missing column '${name}' (have: ${table.header.join(", ")})`,
    );
  }
  return table.columns[k];
}

export function hasColumn(table: Table, name: string): boolean {
  return table.header.includes(name);
}
