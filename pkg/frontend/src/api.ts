/**
 * The only module that talks to the service.  Every method maps 1:1 to a
 * documented endpoint; there are no undocumented calls anywhere in the UI.
 */

import type {
  AgentDescriptorDoc,
  Dimension,
  ErrorBody,
  EventRecord,
  HistoryItemDoc,
  OverviewDoc,
  QueueEntryDoc,
  RunReportDoc,
  RunStateDoc,
  SessionDoc,
  StateDoc,
  TeamDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail: Record<string, unknown> | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Sent with mutations so a concurrent client switching branches turns into
 * a visible 409 instead of silently acting on the wrong session. */
export interface MutateOpts {
  expectedActive?: string;
}

async function parse(response: Response): Promise<any> {
  const text = await response.text();
  let doc: any = null;
  try {
    doc = text ? JSON.parse(text) : null;
  } catch {
    doc = null;
  }
  if (!response.ok) {
    const err = (doc ?? {}) as Partial<ErrorBody>;
    throw new ApiError(
      response.status,
      err.code ?? `http-${response.status}`,
      err.message ?? `request failed with status ${response.status}`,
      err.detail ?? null,
    );
  }
  return doc;
}

export class ApiClient {
  constructor(
    public base: string = "",
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private url(path: string): string {
    return `${this.base}/api/v1${path}`;
  }

  private get(path: string): Promise<any> {
    return this.fetchFn(this.url(path)).then(parse);
  }

  private send(method: string, path: string, body: unknown): Promise<any> {
    return this.fetchFn(this.url(path), {
      method,
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body ?? {}),
    }).then(parse);
  }

  team(): Promise<TeamDoc> {
    return this.get("/team");
  }

  state(): Promise<StateDoc> {
    return this.get("/state");
  }

  agents(): Promise<{ agents: AgentDescriptorDoc[] }> {
    return this.get("/agents");
  }

  agentConfig(name: string): Promise<{ agent: string; config: Record<string, unknown> }> {
    return this.get(`/agents/${encodeURIComponent(name)}/config`);
  }

  putAgentConfig(
    name: string,
    config: Record<string, unknown>,
    opts: MutateOpts = {},
  ): Promise<{ agent: string; config: Record<string, unknown> }> {
    return this.send("PUT", `/agents/${encodeURIComponent(name)}/config`, {
      config,
      expected_active: opts.expectedActive,
    });
  }

  queue(): Promise<{ queue: QueueEntryDoc[] }> {
    return this.get("/queue");
  }

  inject(
    message: { recipient: string; kind?: string; body: string; sender?: string },
    opts: MutateOpts = {},
  ): Promise<{ entry: QueueEntryDoc; queue_length: number }> {
    return this.send("POST", "/messages", {
      ...message,
      expected_active: opts.expectedActive,
    });
  }

  reset(seq: number, opts: MutateOpts & { label?: string } = {}): Promise<{
    session_id: string;
    session: SessionDoc;
  }> {
    return this.send("POST", `/messages/${seq}/reset`, {
      label: opts.label,
      expected_active: opts.expectedActive,
    });
  }

  edit(
    seq: number,
    body: string,
    opts: MutateOpts & { label?: string } = {},
  ): Promise<{ session_id: string; session: SessionDoc }> {
    return this.send("PUT", `/messages/${seq}`, {
      body,
      label: opts.label,
      expected_active: opts.expectedActive,
    });
  }

  step(opts: MutateOpts = {}): Promise<{ status: string }> {
    return this.send("POST", "/control/step", {
      expected_active: opts.expectedActive,
    });
  }

  run(
    opts: MutateOpts & { maxSteps?: number; wait?: boolean } = {},
  ): Promise<{ report: RunReportDoc | null; run_state: Partial<RunStateDoc> }> {
    return this.send("POST", "/control/run", {
      max_steps: opts.maxSteps,
      wait: opts.wait,
      expected_active: opts.expectedActive,
    });
  }

  pause(): Promise<{ run_state: RunStateDoc }> {
    return this.send("POST", "/control/pause", {});
  }

  sessions(): Promise<{ sessions: SessionDoc[]; active_session: string }> {
    return this.get("/sessions");
  }

  history(
    sessionId: string,
    opts: { offset?: number; limit?: number } = {},
  ): Promise<{ session_id: string; total: number; items: HistoryItemDoc[] }> {
    const params = new URLSearchParams();
    if (opts.offset !== undefined) params.set("offset", String(opts.offset));
    if (opts.limit !== undefined) params.set("limit", String(opts.limit));
    const suffix = params.size ? `?${params}` : "";
    return this.get(`/sessions/${encodeURIComponent(sessionId)}/history${suffix}`);
  }

  overview(sessionId: string, dimension: Dimension = "kind"): Promise<OverviewDoc> {
    return this.get(
      `/sessions/${encodeURIComponent(sessionId)}/overview?dimension=${dimension}`,
    );
  }

  activate(sessionId: string, opts: MutateOpts = {}): Promise<{
    session: SessionDoc;
    active_session: string;
  }> {
    return this.send("POST", `/sessions/${encodeURIComponent(sessionId)}/activate`, {
      expected_active: opts.expectedActive,
    });
  }

  deleteSession(sessionId: string): Promise<{ deleted: string }> {
    return this.send("DELETE", `/sessions/${encodeURIComponent(sessionId)}`, {});
  }

  exportSession(sessionId: string): Promise<Record<string, unknown>> {
    return this.get(`/export/${encodeURIComponent(sessionId)}`);
  }

  eventsLog(since = 0, limit?: number): Promise<{ events: EventRecord[] }> {
    const params = new URLSearchParams({ since: String(since) });
    if (limit !== undefined) params.set("limit", String(limit));
    return this.get(`/events/log?${params}`);
  }

  /** URL of the live event stream; consumed by events.ts, not fetched here. */
  eventsUrl(since = 0): string {
    return this.url(`/events?since=${since}`);
  }
}
