/**
 * The timeline panel: messages interleaved with the thoughts they caused,
 * an inline edit form, and per-message reset buttons.  Pure function of
 * (state slice, view state); all interactivity is data-* attributes the
 * app layer listens for.
 */

import type { AppState, ViewState } from "../state.js";
import type { HistoryItemDoc, SessionDoc } from "../types.js";
import { bodyText, esc, VERDICT_MARKS } from "./html.js";

function renderThought(item: Extract<HistoryItemDoc, { item_type: "thought" }>): string {
  const classes = ["thought"];
  if (item.inherited) classes.push("inherited");
  // collapsed by default; <details> keeps the toggle out of view state
  return `<details class="${classes.join(" ")}" data-thought-anchor="${item.seq}">
    <summary>${esc(item.agent)} thought</summary>
    <div class="thought-text">${esc(item.text)}</div>
  </details>`;
}

function renderMessage(
  item: Extract<HistoryItemDoc, { item_type: "message" }>,
  view: ViewState,
  readOnly: boolean,
): string {
  const classes = ["message", `kind-${esc(item.kind)}`];
  if (item.inherited) classes.push("inherited");
  if (item.provenance === "edited") classes.push("edited");
  if (item.kind === "handler-error") classes.push("handler-error");
  const disabled = readOnly ? " disabled" : "";

  const editing = view.editingSeq === item.seq && !item.inherited;
  const body = editing
    ? `<form class="edit-form" data-action="submit-edit" data-seq="${item.seq}">
        <textarea name="body" rows="3">${esc(bodyText(item.payload))}</textarea>
        <button type="submit"${disabled}>fork with edit</button>
        <button type="button" data-action="cancel-edit">cancel</button>
      </form>`
    : `<div class="body">${esc(bodyText(item.payload))}</div>`;

  return `<div class="${classes.join(" ")}" data-msg="${esc(item.session_id)}:${item.seq}" data-seq="${item.seq}">
    <div class="meta">
      <span class="seq">#${item.seq}</span>
      <span class="route">${esc(item.sender)} → ${esc(item.recipient)}</span>
      <span class="kind">${esc(item.kind)}</span>
      ${item.provenance !== "original" ? `<span class="provenance">${esc(item.provenance)}</span>` : ""}
      ${item.inherited ? `<span class="inherited-tag">inherited</span>` : ""}
      <span class="actions">
        <button data-action="reset" data-seq="${item.seq}" title="fork here and re-dispatch unchanged"${disabled}>reset</button>
        <button data-action="edit" data-seq="${item.seq}" title="fork here with an edited message"${disabled}>edit</button>
      </span>
    </div>
    ${body}
  </div>`;
}

export function renderHistory(state: AppState, view: ViewState): string {
  const sessionId = state.activeSession;
  const items = state.histories[sessionId] ?? [];
  const session: SessionDoc | undefined = state.sessions.find(
    (s) => s.session_id === sessionId,
  );
  const readOnlyNow = state.connection !== "open";

  const rows = items
    .map((item) =>
      item.item_type === "thought"
        ? renderThought(item)
        : renderMessage(item, view, readOnlyNow),
    )
    .join("\n");

  const verdict = session?.verdict ?? null;
  const verdictRow = verdict
    ? `<div class="verdict verdict-${esc(verdict.status)}">
        <span class="mark">${VERDICT_MARKS[verdict.status] ?? "?"}</span>
        ${esc(verdict.status)}${verdict.actual !== null ? `: ${esc(verdict.actual)}` : ""}
      </div>`
    : "";

  return `<section class="panel history" data-session="${esc(sessionId)}">
    <header>
      <h2>history · ${esc(sessionId)}${session?.label ? ` (${esc(session.label)})` : ""}</h2>
      <span class="count">${items.filter((i) => i.item_type === "message").length} messages</span>
    </header>
    <div class="items" data-role="history-scroll">
      ${rows || `<div class="empty">no messages yet</div>`}
      ${verdictRow}
    </div>
  </section>`;
}
