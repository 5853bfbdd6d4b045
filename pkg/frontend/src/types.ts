/**
 * Document shapes exactly as the /api/v1 service emits them.
 * Nothing in the UI invents fields; every interface here mirrors a JSON
 * body observable with curl.
 */

export type Provenance = "original" | "edited" | "user-injected";

export interface EnvelopeDoc {
  message_id: string;
  seq: number;
  session_id: string;
  sender: string;
  recipient: string;
  kind: string;
  payload: Record<string, unknown> & { body?: string };
  provenance: Provenance;
  timestamp: number;
}

export interface ThoughtDoc {
  agent: string;
  seq_anchor: number;
  text: string;
  session_id: string;
  timestamp: number;
}

/** One row of a session timeline: a message or a thought anchored to one. */
export type HistoryItemDoc =
  | (EnvelopeDoc & { item_type: "message"; inherited: boolean })
  | (ThoughtDoc & { item_type: "thought"; inherited: boolean; seq: number });

export interface QueueEntryDoc {
  sender: string;
  recipient: string;
  kind: string;
  payload: Record<string, unknown> & { body?: string };
  provenance: Provenance;
  enqueue_order: number;
  position?: number;
}

export interface VerdictDoc {
  session_id: string;
  status: "pass" | "fail" | "unknown";
  expected: string | null;
  actual: string | null;
}

export interface SessionDoc {
  session_id: string;
  parent_id: string | null;
  fork_seq: number | null;
  next_seq: number;
  label: string | null;
  message_count: number;
  verdict: VerdictDoc | null;
  created_at: number;
  active?: boolean;
}

export interface RunStateDoc {
  mode: "paused" | "running" | "stepping";
  faulted: boolean;
  queue_length: number;
  active_session: string;
  in_flight: EnvelopeDoc | null;
}

export interface RunReportDoc {
  steps: number;
  stop_reason: "queue-empty" | "paused" | "ceiling-hit" | "handler-error";
}

export interface StateDoc {
  run_state: RunStateDoc;
  last_run: RunReportDoc | null;
  event_seq: number;
}

export interface ConfigFieldDoc {
  name: string;
  type: "text" | "number" | "integer" | "flag";
  description: string;
  minimum: number | null;
  maximum: number | null;
}

export interface AgentDescriptorDoc {
  name: string;
  type: string;
  description: string;
  handled_kinds: string[];
  config: Record<string, unknown>;
  config_schema: ConfigFieldDoc[];
}

export interface TeamDoc {
  name: string | null;
  description: string;
  task: {
    to: string;
    kind?: string;
    body: string;
    expected_answer?: string;
  } | null;
  edits: Record<string, { seq: number; body: string }>;
}

export interface OverviewCellDoc {
  seq: number;
  message_id: string;
  color: number;
  value: string;
  inherited: boolean;
  edited: boolean;
  kind: string;
  sender: string;
  recipient: string;
}

export interface OverviewColumnDoc {
  session_id: string;
  parent_id: string | null;
  fork_seq: number | null;
  label: string | null;
  active: boolean;
  verdict: "pass" | "fail" | "unknown";
  cells: OverviewCellDoc[];
}

export type Dimension = "kind" | "sender" | "recipient";

export interface OverviewDoc {
  dimension: Dimension;
  palette: Record<string, number>;
  columns: OverviewColumnDoc[];
  focus?: string;
}

export interface EventRecord {
  event_seq: number;
  event_type: string;
  payload: Record<string, unknown>;
  ts?: number;
}

export interface ErrorBody {
  code: string;
  message: string;
  detail: Record<string, unknown> | null;
}
