import { describe, expect, it } from "vitest";
import { renderAgents } from "../src/render/agents.js";
import { colorFor } from "../src/render/html.js";
import { renderHistory } from "../src/render/history.js";
import { renderOverview } from "../src/render/overview.js";
import {
  applySnapshots,
  initialState,
  initialViewState,
  setConnection,
  type AppState,
  type ViewState,
} from "../src/state.js";
import type {
  AgentDescriptorDoc,
  HistoryItemDoc,
  OverviewDoc,
  SessionDoc,
} from "../src/types.js";

function el(html: string): HTMLElement {
  const host = document.createElement("div");
  host.innerHTML = html;
  return host;
}

function message(seq: number, over: Partial<Extract<HistoryItemDoc, { item_type: "message" }>> = {}): HistoryItemDoc {
  return {
    item_type: "message",
    inherited: false,
    message_id: `m-${seq}`,
    seq,
    session_id: "s0",
    sender: "orchestrator",
    recipient: "websurfer",
    kind: "instruction",
    payload: { body: `do thing ${seq}` },
    provenance: "original",
    timestamp: 10 + seq,
    ...over,
  };
}

function historyState(items: HistoryItemDoc[], sessionOver: Partial<SessionDoc> = {}): AppState {
  const st = applySnapshots(initialState(), {
    sessions: [
      {
        session_id: "s0",
        parent_id: null,
        fork_seq: null,
        next_seq: items.length,
        label: null,
        message_count: items.filter((i) => i.item_type === "message").length,
        verdict: null,
        created_at: 0,
        ...sessionOver,
      },
    ],
    activeSession: "s0",
    history: { session_id: "s0", items },
  });
  return setConnection(st, "open");
}

describe("history panel", () => {
  const view: ViewState = initialViewState();

  it("renders thoughts as details, collapsed by default", () => {
    const st = historyState([
      message(0),
      {
        item_type: "thought",
        inherited: false,
        seq: 0,
        agent: "orchestrator",
        seq_anchor: 0,
        text: "let me plan",
        session_id: "s0",
        timestamp: 11,
      },
    ]);
    const dom = el(renderHistory(st, view));
    const details = dom.querySelector("details.thought")!;
    expect(details).toBeTruthy();
    expect(details.hasAttribute("open")).toBe(false);
    expect(details.querySelector("summary")!.textContent).toContain("orchestrator thought");
    expect(details.querySelector(".thought-text")!.textContent).toBe("let me plan");
  });

  it("gives every message reset and edit affordances with its seq", () => {
    const dom = el(renderHistory(historyState([message(0), message(1)]), view));
    const resets = dom.querySelectorAll('[data-action="reset"]');
    expect(resets).toHaveLength(2);
    expect(resets[1]!.getAttribute("data-seq")).toBe("1");
    expect(dom.querySelectorAll('[data-action="edit"]')).toHaveLength(2);
  });

  it("marks inherited, edited, and faulted messages", () => {
    const dom = el(
      renderHistory(
        historyState([
          message(0, { inherited: true }),
          message(1, { provenance: "edited" }),
          message(2, { kind: "handler-error" }),
        ]),
        view,
      ),
    );
    expect(dom.querySelector('.message[data-seq="0"]')!.classList.contains("inherited")).toBe(true);
    expect(dom.querySelector('.message[data-seq="0"] .inherited-tag')).toBeTruthy();
    const edited = dom.querySelector('.message[data-seq="1"]')!;
    expect(edited.classList.contains("edited")).toBe(true);
    expect(edited.querySelector(".provenance")!.textContent).toBe("edited");
    expect(dom.querySelector('.message[data-seq="2"]')!.classList.contains("handler-error")).toBe(true);
  });

  it("opens the edit form only for the message being edited", () => {
    const st = historyState([message(0), message(1)]);
    const dom = el(renderHistory(st, { ...view, editingSeq: 1 }));
    const form = dom.querySelector('form.edit-form[data-seq="1"]')!;
    expect(form).toBeTruthy();
    expect((form.querySelector("textarea")! as HTMLTextAreaElement).value).toBe("do thing 1");
    expect(dom.querySelector('form.edit-form[data-seq="0"]')).toBeNull();
  });

  it("never offers the edit form on an inherited message", () => {
    const st = historyState([message(0, { inherited: true })]);
    const dom = el(renderHistory(st, { ...view, editingSeq: 0 }));
    expect(dom.querySelector("form.edit-form")).toBeNull();
  });

  it("shows the verdict row with the right mark", () => {
    const st = historyState([message(0)], {
      verdict: { session_id: "s0", status: "fail", expected: "519", actual: "525" },
    });
    const dom = el(renderHistory(st, view));
    const row = dom.querySelector(".verdict")!;
    expect(row.classList.contains("verdict-fail")).toBe(true);
    expect(row.querySelector(".mark")!.textContent).toBe("✗");
    expect(row.textContent).toContain("525");
  });

  it("disables mutating buttons while the stream is down", () => {
    const st = setConnection(historyState([message(0)]), "closed");
    const dom = el(renderHistory(st, view));
    expect((dom.querySelector('[data-action="reset"]') as HTMLButtonElement).disabled).toBe(true);
    expect((dom.querySelector('[data-action="edit"]') as HTMLButtonElement).disabled).toBe(true);
  });
});

function overviewDoc(): OverviewDoc {
  const cell = (seq: number, color: number, over: Partial<OverviewDoc["columns"][0]["cells"][0]> = {}) => ({
    seq,
    message_id: `m-${seq}`,
    color,
    value: "instruction",
    inherited: false,
    edited: false,
    kind: "instruction",
    sender: "orchestrator",
    recipient: "websurfer",
    ...over,
  });
  return {
    dimension: "kind",
    palette: { instruction: 0, report: 1 },
    columns: [
      {
        session_id: "s0",
        parent_id: null,
        fork_seq: null,
        label: null,
        active: false,
        verdict: "fail",
        cells: [cell(0, 0), cell(1, 1), cell(2, 0)],
      },
      {
        session_id: "s1",
        parent_id: "s0",
        fork_seq: 2,
        label: "edit@2",
        active: true,
        verdict: "pass",
        cells: [
          cell(0, 0, { inherited: true }),
          cell(1, 1, { inherited: true }),
          cell(2, 0, { edited: true }),
          cell(3, 1),
        ],
      },
    ],
  };
}

describe("overview panel", () => {
  it("draws the fork dash between the inherited prefix and the owned suffix", () => {
    const dom = el(renderOverview(overviewDoc(), "kind"));
    expect(dom.querySelector('[data-column="s0"] .fork-dash')).toBeNull();
    const kids = Array.from(dom.querySelectorAll('[data-column="s1"] .cells > *'));
    expect(kids.map((k) => k.className.split(" ")[0])).toEqual([
      "cell",
      "cell",
      "fork-dash",
      "cell",
      "cell",
    ]);
    const before = kids.slice(0, 2);
    expect(before.every((k) => k.classList.contains("inherited"))).toBe(true);
    expect(kids[3]!.classList.contains("inherited")).toBe(false);
  });

  it("keeps cell color tied to the palette index", () => {
    const dom = el(renderOverview(overviewDoc(), "kind"));
    const cells = Array.from(dom.querySelectorAll('[data-column="s0"] .cell')) as HTMLElement[];
    expect(cells[0]!.style.background).toBe(cells[2]!.style.background);
    expect(cells[0]!.style.background).not.toBe(cells[1]!.style.background);
    expect(cells[0]!.getAttribute("style")).toBe(`background:${colorFor(0)}`);
  });

  it("marks edited cells and shows hover detail", () => {
    const dom = el(renderOverview(overviewDoc(), "kind"));
    const edited = dom.querySelector('[data-column="s1"] .cell.edited')!;
    expect(edited.getAttribute("data-seq")).toBe("2");
    expect(edited.getAttribute("title")).toBe("#2 orchestrator → websurfer [instruction] instruction");
  });

  it("labels the verdict feet and the active column", () => {
    const dom = el(renderOverview(overviewDoc(), "kind"));
    expect(dom.querySelector('[data-column="s0"] .column-foot')!.textContent!.trim()).toBe("✗");
    expect(dom.querySelector('[data-column="s1"] .column-foot')!.textContent!.trim()).toBe("✓");
    expect(dom.querySelector('[data-column="s1"]')!.classList.contains("active")).toBe(true);
    expect(dom.querySelector('[data-column="s0"]')!.classList.contains("active")).toBe(false);
  });

  it("highlights the current dimension toggle", () => {
    const dom = el(renderOverview(overviewDoc(), "sender"));
    const on = dom.querySelectorAll('[data-action="dimension"].on');
    expect(on).toHaveLength(1);
    expect(on[0]!.getAttribute("data-dimension")).toBe("sender");
  });

  it("exposes cells as goto targets", () => {
    const dom = el(renderOverview(overviewDoc(), "kind"));
    const cell = dom.querySelector('[data-column="s1"] .cell[data-seq="3"]')!;
    expect(cell.getAttribute("data-action")).toBe("goto");
    expect(cell.getAttribute("data-session")).toBe("s1");
  });

  it("dashes a column that is still all prefix", () => {
    const doc = overviewDoc();
    doc.columns[1]!.cells = doc.columns[1]!.cells.slice(0, 2).map((c) => ({ ...c, inherited: true }));
    const dom = el(renderOverview(doc, "kind"));
    const kids = Array.from(dom.querySelectorAll('[data-column="s1"] .cells > *'));
    expect(kids.at(-1)!.classList.contains("fork-dash")).toBe(true);
  });
});

function llmAgent(over: Partial<AgentDescriptorDoc> = {}): AgentDescriptorDoc {
  return {
    name: "assistant",
    type: "llm",
    description: "Answers free-form questions.",
    handled_kinds: [],
    config: { system_prompt: "be helpful", model_name: "canned-1", temperature: 0.2 },
    config_schema: [
      { name: "system_prompt", type: "text", description: "Instructions", minimum: null, maximum: null },
      { name: "model_name", type: "text", description: "Backend id", minimum: null, maximum: null },
      { name: "temperature", type: "number", description: "Sampling", minimum: 0, maximum: 1 },
    ],
    ...over,
  };
}

describe("agents panel", () => {
  const view = initialViewState();

  it("lists every agent as a card with type and kinds", () => {
    const dom = el(
      renderAgents(
        [llmAgent(), llmAgent({ name: "surfer", type: "websurfer", handled_kinds: ["instruction"], config_schema: [] })],
        view,
        false,
      ),
    );
    expect(dom.querySelectorAll(".agent-card")).toHaveLength(2);
    expect(dom.querySelector('[data-agent-card="surfer"] .agent-type')!.textContent).toBe("websurfer");
    expect(dom.querySelector('[data-agent-card="surfer"] .kind-chip')!.textContent).toBe("instruction");
    expect(dom.querySelector('[data-agent-card="assistant"] .kind-chip.any')).toBeTruthy();
  });

  it("renders the config form from the schema when a card is open", () => {
    const dom = el(renderAgents([llmAgent()], { ...view, openAgent: "assistant" }, false));
    const prompt = dom.querySelector('input[name="system_prompt"]') as HTMLInputElement;
    expect(prompt.type).toBe("text");
    expect(prompt.value).toBe("be helpful");
    const temp = dom.querySelector('input[name="temperature"]') as HTMLInputElement;
    expect(temp.type).toBe("number");
    expect(temp.getAttribute("step")).toBe("any");
    expect(temp.getAttribute("min")).toBe("0");
    expect(temp.getAttribute("max")).toBe("1");
    expect(temp.value).toBe("0.2");
    expect(dom.querySelector('form[data-action="save-config"]')!.getAttribute("data-agent")).toBe("assistant");
  });

  it("keeps closed cards form-free", () => {
    const dom = el(renderAgents([llmAgent()], view, false));
    expect(dom.querySelector("form.config-form")).toBeNull();
  });

  it("renders integer and flag fields with matching input types", () => {
    const agent = llmAgent({
      name: "tool",
      config: { retries: 3, verbose: true },
      config_schema: [
        { name: "retries", type: "integer", description: "", minimum: 0, maximum: 10 },
        { name: "verbose", type: "flag", description: "", minimum: null, maximum: null },
      ],
    });
    const dom = el(renderAgents([agent], { ...view, openAgent: "tool" }, false));
    const retries = dom.querySelector('input[name="retries"]') as HTMLInputElement;
    expect(retries.getAttribute("step")).toBe("1");
    expect(retries.getAttribute("max")).toBe("10");
    const verbose = dom.querySelector('input[name="verbose"]') as HTMLInputElement;
    expect(verbose.type).toBe("checkbox");
    expect(verbose.checked).toBe(true);
  });

  it("attaches field errors to the offending input", () => {
    const dom = el(
      renderAgents(
        [llmAgent()],
        { ...view, openAgent: "assistant", agentErrors: { temperature: "config key 'temperature' must be <= 1.0" } },
        false,
      ),
    );
    const broken = dom.querySelectorAll(".config-field.invalid");
    expect(broken).toHaveLength(1);
    expect(broken[0]!.querySelector('input[name="temperature"]')).toBeTruthy();
    expect(broken[0]!.querySelector(".field-error")!.textContent).toContain("must be <= 1.0");
  });

  it("says so when there is nothing to configure", () => {
    const agent = llmAgent({ name: "plain", config: {}, config_schema: [] });
    const dom = el(renderAgents([agent], { ...view, openAgent: "plain" }, false));
    expect(dom.querySelector('[data-agent-card="plain"] .no-config')).toBeTruthy();
  });

  it("disables saving while read-only", () => {
    const dom = el(renderAgents([llmAgent()], { ...view, openAgent: "assistant" }, true));
    expect((dom.querySelector('.config-form button[type="submit"]') as HTMLButtonElement).disabled).toBe(true);
  });
});
