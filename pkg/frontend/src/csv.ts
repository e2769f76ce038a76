/** Minimal RFC-4180 CSV reader for the harness result files. */

export interface Table {
  columns: string[];
  rows: string[][];
}

/** Parse CSV text with quoted-field support; first record is the header. */
export function parseCsv(text: string): Table {
  const records: string[][] = [];
  let field = "";
  let record: string[] = [];
  let inQuotes = false;
  let i = 0;
  const pushField = () => {
    record.push(field);
    field = "";
  };
  const pushRecord = () => {
    pushField();
    records.push(record);
    record = [];
  };
  while (i < text.length) {
    const c = text[i];
    if (inQuotes) {
      if (c === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i += 2;
          continue;
        }
        inQuotes = false;
        i += 1;
        continue;
      }
      field += c;
      i += 1;
      continue;
    }
    if (c === '"' && field === "") {
      inQuotes = true;
      i += 1;
    } else if (c === ",") {
      pushField();
      i += 1;
    } else if (c === "\r" && text[i + 1] === "\n") {
      pushRecord();
      i += 2;
    } else if (c === "\n") {
      pushRecord();
      i += 1;
    } else {
      field += c;
      i += 1;
    }
  }
  if (field !== "" || record.length > 0) {
    pushRecord();
  }
  if (records.length === 0) {
    throw new Error("empty CSV input");
  }
  const [columns, ...rows] = records;
  for (const [idx, row] of rows.entries()) {
    if (row.length !== columns.length) {
      throw new Error(
        `CSV row ${idx + 2} has ${row.length} fields, header has ${columns.length}`,
      );
    }
  }
  return { columns, rows };
}

/** Concatenate tables, requiring identical column sets in identical order. */
export function concatTables(tables: Table[]): Table {
  const [head, ...rest] = tables;
  for (const t of rest) {
    if (t.columns.join(",") !== head.columns.join(",")) {
      throw new Error(
        `CSV schema mismatch: [${t.columns}] vs [${head.columns}]`,
      );
    }
  }
  return { columns: head.columns, rows: tables.flatMap((t) => t.rows) };
}

/** Column accessor that fails loudly when a referenced column is missing. */
export function columnIndex(table: Table, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(
      `column '${name}' not found; available: ${table.columns.join(", ")}`,
    );
  }
  return idx;
}
