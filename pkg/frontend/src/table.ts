/** Data table for the selected papers: every known record field, one row
 * per paper, exactly as the server sent them. */

import type { TableRow } from "./types.js";

export const COLUMN_ORDER: (keyof TableRow)[] = [
  "id", "title", "year", "authors", "hop", "is_core",
  "citation_count", "reference_count", "abstract",
];

function formatCell(row: TableRow, column: keyof TableRow): string {
  const value = row[column];
  if (value === null || value === undefined) {
    return "";
  }
  if (Array.isArray(value)) {
    return value.join(", ");
  }
  return String(value);
}

export function renderTable(container: HTMLElement, rows: TableRow[]): void {
  container.textContent = "";
  const doc = container.ownerDocument;
  const table = doc.createElement("table");
  table.className = "paper-table";

  const thead = doc.createElement("thead");
  const headRow = doc.createElement("tr");
  for (const column of COLUMN_ORDER) {
    const th = doc.createElement("th");
    th.textContent = column;
    headRow.appendChild(th);
  }
  thead.appendChild(headRow);
  table.appendChild(thead);

  const tbody = doc.createElement("tbody");
  for (const row of rows) {
    const tr = doc.createElement("tr");
    tr.dataset.paperId = row.id;
    for (const column of COLUMN_ORDER) {
      const td = doc.createElement("td");
      td.textContent = formatCell(row, column);
      tr.appendChild(td);
    }
    tbody.appendChild(tr);
  }
  table.appendChild(tbody);
  container.appendChild(table);
}
