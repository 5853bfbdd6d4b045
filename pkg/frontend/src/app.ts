/**
 * Wires the API client, the event stream, and the panel renderers onto a
 * root element.  Commands only issue HTTP calls; every state change comes
 * back through the event stream (or an explicit snapshot refetch), so the
 * UI can never drift ahead of the service.
 */

import { ApiClient, ApiError } from "./api.js";
import { EventStream, type StreamEvent } from "./events.js";
import { renderAgents } from "./render/agents.js";
import { esc } from "./render/html.js";
import { renderHistory } from "./render/history.js";
import { renderOverview } from "./render/overview.js";
import {
  applyEvent,
  applySnapshots,
  initialState,
  initialViewState,
  readOnly,
  setConnection,
  type AppState,
  type ViewState,
} from "./state.js";
import type { Dimension } from "./types.js";

export interface MountOpts {
  apiBase?: string;
  fetchFn?: typeof fetch;
  confirmFn?: (message: string) => boolean;
  /** Stream reconnect delay, ms. */
  retryMs?: number;
  /** Overview refetch debounce, ms. */
  overviewDebounceMs?: number;
}

function defaultConfirm(message: string): boolean {
  if (typeof window !== "undefined" && typeof window.confirm === "function") {
    return window.confirm(message);
  }
  return true;
}

const delay = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class App {
  state: AppState = initialState();
  view: ViewState = initialViewState();
  readonly api: ApiClient;
  /** Resolves once the initial snapshots are rendered and the stream started. */
  readonly ready: Promise<void>;

  private stream: EventStream | null = null;
  private notice: string | null = null;
  private pendingScroll: number | null = null;
  private pending = new Set<Promise<unknown>>();
  private overviewTimer: ReturnType<typeof setTimeout> | null = null;
  private aborter = new AbortController();
  private confirmFn: (message: string) => boolean;

  constructor(
    readonly root: HTMLElement,
    private opts: MountOpts = {},
  ) {
    this.api = new ApiClient(opts.apiBase ?? "", opts.fetchFn);
    this.confirmFn = opts.confirmFn ?? defaultConfirm;
    const signal = this.aborter.signal;
    root.addEventListener("click", (ev) => this.onClick(ev), { signal });
    root.addEventListener("submit", (ev) => this.onSubmit(ev), { signal });
    root.addEventListener("scroll", (ev) => this.onScroll(ev), { capture: true, signal });
    root.innerHTML = `<div class="layout loading">connecting…</div>`;
    this.ready = this.track(this.load());
  }

  dispose(): void {
    this.aborter.abort();
    this.stream?.stop();
    if (this.overviewTimer !== null) clearTimeout(this.overviewTimer);
  }

  /** Waits until no refetch is scheduled or in flight.  Test hook. */
  async settled(): Promise<void> {
    for (let spin = 0; spin < 1000; spin += 1) {
      if (this.overviewTimer !== null) {
        await delay(30);
        continue;
      }
      if (this.pending.size > 0) {
        await Promise.allSettled([...this.pending]);
        await delay(0);
        continue;
      }
      return;
    }
  }

  // -- data flow --------------------------------------------------------------

  private async load(): Promise<void> {
    // cursor first: a frame that overlaps a later snapshot is deduped by the reducer
    const stateDoc = await this.api.state();
    const [team, agentsDoc, sessionsDoc, queueDoc] = await Promise.all([
      this.api.team(),
      this.api.agents(),
      this.api.sessions(),
      this.api.queue(),
    ]);
    this.state = applySnapshots(this.state, {
      team,
      agents: agentsDoc.agents,
      sessions: sessionsDoc.sessions,
      activeSession: sessionsDoc.active_session,
      runState: stateDoc.run_state,
      lastRun: stateDoc.last_run,
      queue: queueDoc.queue,
      eventSeq: stateDoc.event_seq,
    });
    const active = this.state.activeSession;
    const [history, overview] = await Promise.all([
      this.api.history(active),
      this.api.overview(active, this.view.dimension),
    ]);
    this.state = applySnapshots(this.state, {
      history: { session_id: active, items: history.items },
      overview,
    });
    this.render();
    this.stream = new EventStream((since) => this.api.eventsUrl(since), {
      since: this.state.eventSeq,
      onEvent: (frame) => this.onFrame(frame),
      onStatus: (status) => {
        this.state = setConnection(this.state, status);
        this.render();
      },
      retryMs: this.opts.retryMs,
      fetchFn: this.opts.fetchFn,
    });
    this.stream.start();
  }

  private onFrame(frame: StreamEvent): void {
    const before = this.state;
    this.state = applyEvent(this.state, frame);
    switch (frame.event) {
      case "message-appended":
      case "session-created":
      case "verdict-changed":
        this.scheduleOverview();
        break;
      case "runstate-changed":
        this.scheduleOverview();
        if (this.state.activeSession !== before.activeSession) {
          this.background(this.ensureHistory(this.state.activeSession));
        }
        break;
      default:
        break;
    }
    this.render();
  }

  private scheduleOverview(): void {
    if (this.overviewTimer !== null) clearTimeout(this.overviewTimer);
    this.overviewTimer = setTimeout(() => {
      this.overviewTimer = null;
      this.background(this.refetchOverview());
    }, this.opts.overviewDebounceMs ?? 80);
  }

  private async refetchOverview(): Promise<void> {
    const active = this.state.activeSession;
    const dimension = this.view.dimension;
    const doc = await this.api.overview(active, dimension);
    // a reply for a session or dimension we've already left must not clobber
    if (this.state.activeSession !== active || this.view.dimension !== dimension) return;
    this.state = applySnapshots(this.state, { overview: doc });
    this.render();
  }

  private async ensureHistory(sessionId: string, force = false): Promise<void> {
    if (!force && this.state.histories[sessionId] !== undefined) return;
    const doc = await this.api.history(sessionId);
    this.state = applySnapshots(this.state, {
      history: { session_id: sessionId, items: doc.items },
    });
    this.render();
  }

  /** Refetches authoritative snapshots after another client changed branches. */
  private async resync(): Promise<void> {
    const [stateDoc, sessionsDoc, queueDoc] = await Promise.all([
      this.api.state(),
      this.api.sessions(),
      this.api.queue(),
    ]);
    this.state = applySnapshots(this.state, {
      sessions: sessionsDoc.sessions,
      activeSession: sessionsDoc.active_session,
      runState: stateDoc.run_state,
      lastRun: stateDoc.last_run,
      queue: queueDoc.queue,
      eventSeq: Math.max(this.state.eventSeq, stateDoc.event_seq),
    });
    await this.ensureHistory(this.state.activeSession, true);
    await this.refetchOverview();
    this.render();
  }

  private track<T>(promise: Promise<T>): Promise<T> {
    this.pending.add(promise);
    void promise.finally(() => this.pending.delete(promise)).catch(() => {});
    return promise;
  }

  private background(promise: Promise<unknown>): void {
    void this.track(promise).catch((err) => {
      this.notice = err instanceof Error ? err.message : String(err);
      this.render();
    });
  }

  private command(fn: () => Promise<unknown>): void {
    if (readOnly(this.state)) return;
    this.background(
      (async () => {
        try {
          await fn();
          this.notice = null;
          this.render();
        } catch (err) {
          if (!(err instanceof ApiError)) throw err;
          this.notice = err.message;
          // a stale active session means another client switched branches
          if (err.status === 409 && err.code === "stale-session") await this.resync();
          this.render();
        }
      })(),
    );
  }

  // -- DOM events ---------------------------------------------------------------

  private onClick(ev: Event): void {
    const origin = ev.target as HTMLElement | null;
    const target = origin?.closest?.("[data-action]");
    if (!(target instanceof HTMLElement)) return;
    const action = target.getAttribute("data-action");
    // forms carry data-action too; their buttons are handled on submit
    if (action === "submit-edit" || action === "inject" || action === "save-config") return;
    const expectedActive = this.state.activeSession;
    switch (action) {
      case "step":
        this.command(() => this.api.step({ expectedActive }));
        break;
      case "run":
        this.command(() => this.api.run({ wait: false, expectedActive }));
        break;
      case "pause":
        this.command(() => this.api.pause());
        break;
      case "reset": {
        const seq = Number(target.getAttribute("data-seq"));
        if (!this.confirmFn(`fork at #${seq} and re-dispatch that message unchanged?`)) return;
        this.command(() => this.api.reset(seq, { expectedActive }));
        break;
      }
      case "edit":
        this.view = { ...this.view, editingSeq: Number(target.getAttribute("data-seq")) };
        this.render();
        break;
      case "cancel-edit":
        this.view = { ...this.view, editingSeq: null };
        this.render();
        break;
      case "goto": {
        const session = target.getAttribute("data-session") ?? "";
        this.pendingScroll = Number(target.getAttribute("data-seq"));
        if (session && session !== this.state.activeSession) {
          this.command(() => this.api.activate(session, { expectedActive }));
        } else {
          this.render();
        }
        break;
      }
      case "activate": {
        const session = target.getAttribute("data-session") ?? "";
        if (session && session !== this.state.activeSession) {
          this.command(() => this.api.activate(session, { expectedActive }));
        }
        break;
      }
      case "dimension": {
        const dimension = target.getAttribute("data-dimension") as Dimension;
        this.view = { ...this.view, dimension };
        this.background(this.refetchOverview());
        this.render();
        break;
      }
      case "toggle-agent": {
        const name = target.getAttribute("data-agent") ?? "";
        this.view = {
          ...this.view,
          openAgent: this.view.openAgent === name ? null : name,
          agentErrors: {},
        };
        this.render();
        break;
      }
      default:
        break;
    }
  }

  private onSubmit(ev: Event): void {
    ev.preventDefault();
    const form = ev.target as HTMLFormElement;
    const action = form.getAttribute("data-action");
    const expectedActive = this.state.activeSession;
    if (action === "submit-edit") {
      const seq = Number(form.getAttribute("data-seq"));
      const field = form.elements.namedItem("body") as HTMLTextAreaElement | null;
      const body = field?.value ?? "";
      if (!this.confirmFn(`fork a new session from #${seq} seeded with this edit?`)) return;
      this.view = { ...this.view, editingSeq: null };
      this.command(() => this.api.edit(seq, body, { expectedActive }));
      this.render();
    } else if (action === "inject") {
      const recipient =
        (form.elements.namedItem("recipient") as HTMLSelectElement | null)?.value ?? "broadcast";
      const body = (form.elements.namedItem("body") as HTMLInputElement | null)?.value ?? "";
      if (!body) return;
      this.command(() => this.api.inject({ recipient, body }, { expectedActive }));
    } else if (action === "save-config") {
      const agent = form.getAttribute("data-agent") ?? "";
      this.background(this.saveConfig(agent, form));
    }
  }

  private async saveConfig(agentName: string, form: HTMLFormElement): Promise<void> {
    const descriptor = this.state.agents.find((a) => a.name === agentName);
    if (!descriptor) return;
    const config: Record<string, unknown> = {};
    for (const field of descriptor.config_schema) {
      const el = form.elements.namedItem(field.name) as HTMLInputElement | null;
      if (!el) continue;
      if (field.type === "flag") {
        config[field.name] = el.checked;
      } else if (field.type === "number" || field.type === "integer") {
        if (el.value.trim() === "") continue; // blank means leave unchanged
        const num = Number(el.value);
        config[field.name] = field.type === "integer" ? Math.trunc(num) : num;
      } else {
        config[field.name] = el.value;
      }
    }
    try {
      await this.api.putAgentConfig(agentName, config, {
        expectedActive: this.state.activeSession,
      });
      this.view = { ...this.view, agentErrors: {} };
      this.notice = null;
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        const keys = (err.detail?.["keys"] as string[] | undefined) ?? [];
        const errors: Record<string, string> = {};
        for (const key of keys) errors[key] = err.message;
        this.view = { ...this.view, agentErrors: keys.length ? errors : {} };
        if (!keys.length) this.notice = err.message;
      } else if (err instanceof ApiError) {
        this.notice = err.message;
        if (err.status === 409 && err.code === "stale-session") await this.resync();
      } else {
        throw err;
      }
    }
    this.render();
  }

  private onScroll(ev: Event): void {
    const el = ev.target;
    if (!(el instanceof HTMLElement) || el.getAttribute("data-role") !== "history-scroll") return;
    const nearBottom = el.scrollHeight - el.scrollTop - el.clientHeight < 40;
    this.view = { ...this.view, autoScroll: nearBottom };
  }

  // -- rendering ---------------------------------------------------------------

  private draftKey(el: Element): string | null {
    const name = el.getAttribute("name");
    if (!name) return null;
    const form = el.closest("form");
    if (!form) return null;
    const scope = form.getAttribute("data-agent") ?? form.getAttribute("data-seq") ?? "";
    return `${form.getAttribute("data-action") ?? ""}/${scope}/${name}`;
  }

  /** Only the field being typed in survives a streamed re-render. */
  private captureDraft(): { key: string; value: string } | null {
    const el = this.root.ownerDocument.activeElement;
    if (!el || !this.root.contains(el)) return null;
    if (!(el instanceof HTMLInputElement) && !(el instanceof HTMLTextAreaElement)) return null;
    const key = this.draftKey(el);
    return key ? { key, value: el.value } : null;
  }

  private restoreDraft(draft: { key: string; value: string } | null): void {
    if (!draft) return;
    for (const el of Array.from(this.root.querySelectorAll("form [name]"))) {
      if (this.draftKey(el) !== draft.key) continue;
      if (el instanceof HTMLInputElement || el instanceof HTMLTextAreaElement) {
        el.value = draft.value;
        el.focus();
      }
      return;
    }
  }

  render(): void {
    const ro = readOnly(this.state);
    const rs = this.state.runState;
    const dis = ro ? " disabled" : "";
    const recipients = ["broadcast", ...this.state.agents.map((a) => a.name)];
    const preferred = this.state.team?.task?.to;
    const options = recipients
      .map(
        (name) =>
          `<option value="${esc(name)}"${name === preferred ? " selected" : ""}>${esc(name)}</option>`,
      )
      .join("");

    const scroller = this.root.querySelector('[data-role="history-scroll"]');
    const keepScroll =
      scroller instanceof HTMLElement && !this.view.autoScroll ? scroller.scrollTop : null;
    const draft = this.captureDraft();

    this.root.innerHTML = `<div class="layout${ro ? " read-only" : ""}">
      ${
        ro
          ? `<div class="banner offline" data-role="offline-banner">event stream down: read-only until it reconnects</div>`
          : ""
      }
      <header class="toolbar">
        <span class="team-name">${esc(this.state.team?.name ?? "backstep")}</span>
        <span class="mode mode-${esc(rs?.mode ?? "paused")}">${esc(rs?.mode ?? "…")}${
          rs?.faulted ? " · faulted" : ""
        }</span>
        <span class="queue-len">queue ${this.state.queue.length}</span>
        <span class="controls">
          <button data-action="step"${dis}>step</button>
          <button data-action="run"${dis}>run</button>
          <button data-action="pause"${dis}>pause</button>
        </span>
        <form class="inject" data-action="inject">
          <select name="recipient">${options}</select>
          <input name="body" placeholder="inject a task" autocomplete="off">
          <button type="submit"${dis}>send</button>
        </form>
        ${this.notice ? `<span class="notice" data-role="notice">${esc(this.notice)}</span>` : ""}
      </header>
      <main class="panels">
        ${renderOverview(this.state.overview, this.view.dimension)}
        ${renderHistory(this.state, this.view)}
        ${renderAgents(this.state.agents, this.view, ro)}
      </main>
    </div>`;

    this.restoreDraft(draft);
    const next = this.root.querySelector('[data-role="history-scroll"]');
    if (next instanceof HTMLElement) {
      if (this.view.autoScroll) next.scrollTop = next.scrollHeight;
      else if (keepScroll !== null) next.scrollTop = keepScroll;
    }
    if (this.pendingScroll !== null) {
      const sel = `[data-msg="${this.state.activeSession}:${this.pendingScroll}"]`;
      const el = this.root.querySelector(sel);
      if (el) {
        try {
          (el as HTMLElement).scrollIntoView?.({ block: "center" });
        } catch {
          // layout engines without scrolling support
        }
        this.pendingScroll = null;
        this.view = { ...this.view, autoScroll: false };
      }
    }
  }
}

export function mount(root: HTMLElement, opts: MountOpts = {}): App {
  return new App(root, opts);
}
