/**
 * Fork-aligned session columns.  Every visual flag maps one-to-one onto the
 * overview document: cell color = palette index, dimmed = inherited, ring =
 * edited, dash = fork point, footer mark = verdict.
 */

import type { OverviewColumnDoc, OverviewDoc } from "../types.js";
import { colorFor, esc, VERDICT_MARKS } from "./html.js";

const DIMENSIONS = ["kind", "sender", "recipient"] as const;

function renderColumn(column: OverviewColumnDoc): string {
  const classes = ["column"];
  if (column.active) classes.push("active");

  const cells: string[] = [];
  let dashed = false;
  for (const cell of column.cells) {
    if (!dashed && !cell.inherited && column.fork_seq !== null) {
      cells.push(`<div class="fork-dash" title="forked from ${esc(column.parent_id)} at seq ${column.fork_seq}"></div>`);
      dashed = true;
    }
    const cellClasses = ["cell"];
    if (cell.inherited) cellClasses.push("inherited");
    if (cell.edited) cellClasses.push("edited");
    const hover = `#${cell.seq} ${cell.sender} → ${cell.recipient} [${cell.kind}] ${cell.value}`;
    cells.push(
      `<div class="${cellClasses.join(" ")}" style="background:${colorFor(cell.color)}"` +
        ` data-action="goto" data-session="${esc(column.session_id)}" data-seq="${cell.seq}"` +
        ` title="${esc(hover)}"></div>`,
    );
  }
  // a column that is all prefix still shows where its own suffix will start
  if (!dashed && column.fork_seq !== null) {
    cells.push(`<div class="fork-dash" title="forked from ${esc(column.parent_id)} at seq ${column.fork_seq}"></div>`);
  }

  return `<div class="${classes.join(" ")}" data-column="${esc(column.session_id)}">
    <div class="column-head" data-action="activate" data-session="${esc(column.session_id)}"
         title="${esc(column.label ?? column.session_id)}">${esc(column.session_id)}</div>
    <div class="cells">${cells.join("")}</div>
    <div class="column-foot verdict-${esc(column.verdict)}" title="verdict: ${esc(column.verdict)}">
      ${VERDICT_MARKS[column.verdict] ?? "?"}
    </div>
  </div>`;
}

export function renderOverview(doc: OverviewDoc | null, dimension: string): string {
  const toggle = DIMENSIONS.map(
    (dim) =>
      `<button data-action="dimension" data-dimension="${dim}"` +
      ` class="${dim === dimension ? "on" : ""}">${dim}</button>`,
  ).join("");

  const columns = doc ? doc.columns.map(renderColumn).join("\n") : "";
  return `<section class="panel overview">
    <header>
      <h2>sessions</h2>
      <span class="dimension-toggle" data-role="dimension-toggle">${toggle}</span>
    </header>
    <div class="columns">${columns || `<div class="empty">nothing recorded yet</div>`}</div>
  </section>`;
}
