/**
 * Client-side state and the event reducer.
 *
 * The event stream is the only thing that changes AppState after the
 * initial snapshots: command handlers never mutate state optimistically.
 * applyEvent is pure (fresh objects on every changed path) so replaying a
 * recorded stream always lands on the same state.
 */

import type { ConnectionStatus, StreamEvent } from "./events.js";
import type {
  AgentDescriptorDoc,
  Dimension,
  EnvelopeDoc,
  HistoryItemDoc,
  OverviewDoc,
  QueueEntryDoc,
  RunReportDoc,
  RunStateDoc,
  SessionDoc,
  TeamDoc,
  ThoughtDoc,
  VerdictDoc,
} from "./types.js";

export interface AppState {
  team: TeamDoc | null;
  agents: AgentDescriptorDoc[];
  sessions: SessionDoc[];
  activeSession: string;
  runState: RunStateDoc | null;
  lastRun: RunReportDoc | null;
  queue: QueueEntryDoc[];
  /** Full timeline per session, in the shape the history endpoint returns. */
  histories: Record<string, HistoryItemDoc[]>;
  overview: OverviewDoc | null;
  eventSeq: number;
  connection: ConnectionStatus;
}

export interface ViewState {
  dimension: Dimension;
  /** Seq whose inline edit form is open, if any. */
  editingSeq: number | null;
  /** Agent whose config form is open, if any. */
  openAgent: string | null;
  /** Field-level validation errors from the last config save attempt. */
  agentErrors: Record<string, string>;
  /** Suspended while the user has scrolled away from the newest message. */
  autoScroll: boolean;
}

export function initialState(): AppState {
  return {
    team: null,
    agents: [],
    sessions: [],
    activeSession: "s0",
    runState: null,
    lastRun: null,
    queue: [],
    histories: {},
    overview: null,
    eventSeq: 0,
    connection: "connecting",
  };
}

export function initialViewState(): ViewState {
  return {
    dimension: "kind",
    editingSeq: null,
    openAgent: null,
    agentErrors: {},
    autoScroll: true,
  };
}

export interface Snapshots {
  team?: TeamDoc;
  agents?: AgentDescriptorDoc[];
  sessions?: SessionDoc[];
  activeSession?: string;
  runState?: RunStateDoc;
  lastRun?: RunReportDoc | null;
  queue?: QueueEntryDoc[];
  history?: { session_id: string; items: HistoryItemDoc[] };
  overview?: OverviewDoc;
  eventSeq?: number;
}

export function applySnapshots(state: AppState, snap: Snapshots): AppState {
  const next = { ...state };
  if (snap.team !== undefined) next.team = snap.team;
  if (snap.agents !== undefined) next.agents = snap.agents;
  if (snap.sessions !== undefined) next.sessions = snap.sessions;
  if (snap.activeSession !== undefined) next.activeSession = snap.activeSession;
  if (snap.runState !== undefined) {
    next.runState = snap.runState;
    next.activeSession = snap.runState.active_session;
  }
  if (snap.lastRun !== undefined) next.lastRun = snap.lastRun;
  if (snap.queue !== undefined) next.queue = snap.queue;
  if (snap.history !== undefined) {
    next.histories = {
      ...next.histories,
      [snap.history.session_id]: snap.history.items,
    };
  }
  if (snap.overview !== undefined) next.overview = snap.overview;
  if (snap.eventSeq !== undefined) next.eventSeq = snap.eventSeq;
  return next;
}

function itemSeq(item: HistoryItemDoc): number {
  return item.seq;
}

/** Timeline position: thoughts sort just after the message they annotate. */
function itemOrder(item: HistoryItemDoc): number {
  return item.seq * 2 + (item.item_type === "thought" ? 1 : 0);
}

function appendItem(
  state: AppState,
  sessionId: string,
  item: HistoryItemDoc,
): AppState {
  const items = state.histories[sessionId] ?? [];
  return {
    ...state,
    histories: { ...state.histories, [sessionId]: [...items, item] },
  };
}

export function applyEvent(state: AppState, frame: StreamEvent): AppState {
  const payload = (frame.data ?? {}) as Record<string, unknown>;
  let next: AppState;
  switch (frame.event) {
    case "message-appended": {
      const envelope = payload["envelope"] as EnvelopeDoc;
      const present = state.histories[envelope.session_id] ?? [];
      if (present.some((i) => i.item_type === "message" && i.seq === envelope.seq)) {
        // replayed frame already reflected in a fetched snapshot
        next = { ...state };
        break;
      }
      next = appendItem(state, envelope.session_id, {
        ...envelope,
        item_type: "message",
        inherited: false,
      });
      next.sessions = next.sessions.map((s) =>
        s.session_id === envelope.session_id
          ? { ...s, next_seq: envelope.seq + 1, message_count: s.message_count + 1 }
          : s,
      );
      break;
    }
    case "thought-appended": {
      const thought = payload["thought"] as ThoughtDoc;
      const logged = state.histories[thought.session_id] ?? [];
      if (
        logged.some(
          (i) =>
            i.item_type === "thought" &&
            i.seq === thought.seq_anchor &&
            i.agent === thought.agent &&
            i.text === thought.text,
        )
      ) {
        next = { ...state };
        break;
      }
      next = appendItem(state, thought.session_id, {
        ...thought,
        item_type: "thought",
        inherited: false,
        seq: thought.seq_anchor,
      });
      break;
    }
    case "queue-changed": {
      next = { ...state, queue: (payload["queue"] as QueueEntryDoc[]) ?? [] };
      break;
    }
    case "session-created": {
      const session = payload["session"] as SessionDoc;
      if (state.sessions.some((s) => s.session_id === session.session_id)) {
        next = { ...state };
        break;
      }
      const parentItems =
        session.parent_id !== null ? state.histories[session.parent_id] ?? [] : [];
      const forkSeq = session.fork_seq ?? 0;
      const prefix = parentItems
        .filter((item) => itemSeq(item) < forkSeq)
        .map((item) => ({ ...item, inherited: true }) as HistoryItemDoc)
        .sort((a, b) => itemOrder(a) - itemOrder(b));
      next = {
        ...state,
        sessions: [...state.sessions, session],
        histories: { ...state.histories, [session.session_id]: prefix },
      };
      break;
    }
    case "runstate-changed": {
      const runState = payload["run_state"] as RunStateDoc;
      next = { ...state, runState, activeSession: runState.active_session };
      break;
    }
    case "verdict-changed": {
      const verdict = payload["verdict"] as VerdictDoc;
      next = {
        ...state,
        sessions: state.sessions.map((s) =>
          s.session_id === verdict.session_id ? { ...s, verdict } : s,
        ),
      };
      break;
    }
    case "config-changed": {
      const agent = payload["agent"] as string;
      const config = payload["config"] as Record<string, unknown>;
      next = {
        ...state,
        agents: state.agents.map((a) => (a.name === agent ? { ...a, config } : a)),
      };
      break;
    }
    default:
      // unknown event kinds are ignored so old clients survive new servers
      next = { ...state };
  }
  next.eventSeq = Math.max(state.eventSeq, frame.id);
  return next;
}

export function setConnection(state: AppState, status: ConnectionStatus): AppState {
  return { ...state, connection: status };
}

/** True while mutations should be disabled (stream down = read-only mode). */
export function readOnly(state: AppState): boolean {
  return state.connection !== "open";
}
