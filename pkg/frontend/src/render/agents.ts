/**
 * Agent cards with a config form generated from each agent's schema.
 * Validation problems come back from the API and are shown per field.
 */

import type { ViewState } from "../state.js";
import type { AgentDescriptorDoc, ConfigFieldDoc } from "../types.js";
import { esc } from "./html.js";

function inputFor(field: ConfigFieldDoc, value: unknown): string {
  const name = esc(field.name);
  const common = `name="${name}" data-field="${name}"`;
  const range =
    (field.minimum !== null ? ` min="${field.minimum}"` : "") +
    (field.maximum !== null ? ` max="${field.maximum}"` : "");
  switch (field.type) {
    case "flag":
      return `<input type="checkbox" ${common}${value ? " checked" : ""}>`;
    case "integer":
      return `<input type="number" step="1" ${common}${range} value="${esc(value ?? "")}">`;
    case "number":
      return `<input type="number" step="any" ${common}${range} value="${esc(value ?? "")}">`;
    default:
      return `<input type="text" ${common} value="${esc(value ?? "")}">`;
  }
}

function renderForm(
  agent: AgentDescriptorDoc,
  errors: Record<string, string>,
  readOnly: boolean,
): string {
  if (agent.config_schema.length === 0) {
    return `<div class="no-config">nothing to configure</div>`;
  }
  const rows = agent.config_schema
    .map((field) => {
      const error = errors[field.name];
      return `<label class="config-field${error ? " invalid" : ""}">
        <span class="field-name" title="${esc(field.description)}">${esc(field.name)}</span>
        ${inputFor(field, agent.config[field.name])}
        ${error ? `<span class="field-error">${esc(error)}</span>` : ""}
      </label>`;
    })
    .join("\n");
  return `<form class="config-form" data-action="save-config" data-agent="${esc(agent.name)}">
    ${rows}
    <button type="submit"${readOnly ? " disabled" : ""}>save</button>
  </form>`;
}

export function renderAgents(
  agents: AgentDescriptorDoc[],
  view: ViewState,
  readOnly: boolean,
): string {
  const cards = agents
    .map((agent) => {
      const open = view.openAgent === agent.name;
      return `<div class="agent-card${open ? " open" : ""}" data-agent-card="${esc(agent.name)}">
        <div class="card-head" data-action="toggle-agent" data-agent="${esc(agent.name)}">
          <span class="agent-name">${esc(agent.name)}</span>
          <span class="agent-type">${esc(agent.type)}</span>
        </div>
        <div class="agent-desc">${esc(agent.description)}</div>
        <div class="agent-kinds">${
          agent.handled_kinds.length
            ? agent.handled_kinds.map((k) => `<span class="kind-chip">${esc(k)}</span>`).join("")
            : `<span class="kind-chip any">any kind</span>`
        }</div>
        ${open ? renderForm(agent, view.agentErrors, readOnly) : ""}
      </div>`;
    })
    .join("\n");
  return `<section class="panel agents">
    <header><h2>agents</h2></header>
    <div class="cards">${cards || `<div class="empty">no agents</div>`}</div>
  </section>`;
}
