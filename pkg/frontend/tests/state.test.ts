import { describe, expect, it } from "vitest";
import type { StreamEvent } from "../src/events.js";
import {
  applyEvent,
  applySnapshots,
  initialState,
  readOnly,
  setConnection,
  type AppState,
} from "../src/state.js";
import type { EnvelopeDoc, RunStateDoc, SessionDoc, ThoughtDoc } from "../src/types.js";

function envelope(seq: number, over: Partial<EnvelopeDoc> = {}): EnvelopeDoc {
  return {
    message_id: `m-${seq}`,
    seq,
    session_id: "s0",
    sender: "user",
    recipient: "orchestrator",
    kind: "task",
    payload: { body: `msg ${seq}` },
    provenance: "original",
    timestamp: 1000 + seq,
    ...over,
  };
}

function thought(anchor: number, over: Partial<ThoughtDoc> = {}): ThoughtDoc {
  return {
    agent: "orchestrator",
    seq_anchor: anchor,
    text: `thinking about ${anchor}`,
    session_id: "s0",
    timestamp: 2000 + anchor,
    ...over,
  };
}

function session(id: string, over: Partial<SessionDoc> = {}): SessionDoc {
  return {
    session_id: id,
    parent_id: null,
    fork_seq: null,
    next_seq: 0,
    label: null,
    message_count: 0,
    verdict: null,
    created_at: 1,
    ...over,
  };
}

function runState(over: Partial<RunStateDoc> = {}): RunStateDoc {
  return {
    mode: "paused",
    faulted: false,
    queue_length: 0,
    active_session: "s0",
    in_flight: null,
    ...over,
  };
}

function frame(id: number, event: string, data: unknown): StreamEvent {
  return { id, event, data };
}

function seeded(): AppState {
  return applySnapshots(initialState(), {
    sessions: [session("s0")],
    activeSession: "s0",
    history: { session_id: "s0", items: [] },
  });
}

describe("applyEvent", () => {
  it("appends messages and advances the session counters", () => {
    let st = seeded();
    st = applyEvent(st, frame(1, "message-appended", { envelope: envelope(0) }));
    st = applyEvent(st, frame(2, "message-appended", { envelope: envelope(1) }));
    expect(st.histories["s0"]).toHaveLength(2);
    expect(st.histories["s0"]![0]).toMatchObject({ item_type: "message", seq: 0, inherited: false });
    const s0 = st.sessions.find((s) => s.session_id === "s0")!;
    expect(s0.next_seq).toBe(2);
    expect(s0.message_count).toBe(2);
    expect(st.eventSeq).toBe(2);
  });

  it("drops a message frame already present from a snapshot", () => {
    let st = seeded();
    const ev = frame(1, "message-appended", { envelope: envelope(0) });
    st = applyEvent(st, ev);
    const again = applyEvent(st, ev);
    expect(again.histories["s0"]).toHaveLength(1);
    expect(again.sessions.find((s) => s.session_id === "s0")!.message_count).toBe(1);
  });

  it("anchors thoughts at the seq they annotate", () => {
    let st = seeded();
    st = applyEvent(st, frame(1, "message-appended", { envelope: envelope(0) }));
    st = applyEvent(st, frame(2, "thought-appended", { thought: thought(0) }));
    const item = st.histories["s0"]![1]!;
    expect(item.item_type).toBe("thought");
    expect(item.seq).toBe(0);
    const dup = applyEvent(st, frame(3, "thought-appended", { thought: thought(0) }));
    expect(dup.histories["s0"]).toHaveLength(2);
  });

  it("replaces the queue wholesale", () => {
    let st = seeded();
    st = applyEvent(st, {
      id: 1,
      event: "queue-changed",
      data: {
        queue: [
          {
            sender: "user",
            recipient: "orchestrator",
            kind: "task",
            payload: { body: "x" },
            provenance: "user-injected",
            enqueue_order: 0,
          },
        ],
      },
    });
    expect(st.queue).toHaveLength(1);
    st = applyEvent(st, frame(2, "queue-changed", { queue: [] }));
    expect(st.queue).toHaveLength(0);
  });

  it("seeds a forked session with the parent prefix marked inherited", () => {
    let st = seeded();
    for (let i = 0; i < 5; i += 1) {
      st = applyEvent(st, frame(i + 1, "message-appended", { envelope: envelope(i) }));
    }
    st = applyEvent(st, frame(6, "thought-appended", { thought: thought(2) }));
    st = applyEvent(st, frame(7, "session-created", {
      session: session("s1", { parent_id: "s0", fork_seq: 3, label: "edit@3" }),
    }));

    const child = st.histories["s1"]!;
    // messages 0..2 plus the thought anchored at 2, in timeline order
    expect(child.map((i) => [i.item_type, i.seq])).toEqual([
      ["message", 0],
      ["message", 1],
      ["message", 2],
      ["thought", 2],
    ]);
    expect(child.every((i) => i.inherited)).toBe(true);
    // the parent copy is untouched
    expect(st.histories["s0"]!.every((i) => !i.inherited)).toBe(true);
    expect(st.sessions.map((s) => s.session_id)).toEqual(["s0", "s1"]);
  });

  it("ignores a session-created replay for a session it already has", () => {
    let st = seeded();
    const ev = frame(1, "session-created", { session: session("s1", { parent_id: "s0", fork_seq: 0 }) });
    st = applyEvent(st, ev);
    st = applyEvent(st, ev);
    expect(st.sessions.filter((s) => s.session_id === "s1")).toHaveLength(1);
  });

  it("follows the active session from run state", () => {
    let st = seeded();
    st = applyEvent(st, frame(1, "runstate-changed", {
      run_state: runState({ mode: "running", active_session: "s1", queue_length: 2 }),
    }));
    expect(st.activeSession).toBe("s1");
    expect(st.runState?.mode).toBe("running");
  });

  it("applies verdicts to the named session only", () => {
    let st = applySnapshots(initialState(), { sessions: [session("s0"), session("s1")] });
    st = applyEvent(st, frame(1, "verdict-changed", {
      verdict: { session_id: "s1", status: "pass", expected: "519", actual: "519" },
    }));
    expect(st.sessions.find((s) => s.session_id === "s1")!.verdict?.status).toBe("pass");
    expect(st.sessions.find((s) => s.session_id === "s0")!.verdict).toBeNull();
  });

  it("applies config changes to the named agent", () => {
    let st = applySnapshots(initialState(), {
      agents: [
        {
          name: "assistant",
          type: "llm",
          description: "",
          handled_kinds: [],
          config: { temperature: 0.2 },
          config_schema: [],
        },
        {
          name: "other",
          type: "executor",
          description: "",
          handled_kinds: [],
          config: {},
          config_schema: [],
        },
      ],
    });
    st = applyEvent(st, frame(1, "config-changed", { agent: "assistant", config: { temperature: 0.9 } }));
    expect(st.agents[0]!.config["temperature"]).toBe(0.9);
    expect(st.agents[1]!.config).toEqual({});
  });

  it("ignores unknown event kinds but still advances the cursor", () => {
    const st = seeded();
    const next = applyEvent(st, frame(41, "brand-new-event", { anything: true }));
    expect(next.histories).toEqual(st.histories);
    expect(next.eventSeq).toBe(41);
  });

  it("never mutates its input", () => {
    const st = seeded();
    const before = JSON.stringify(st);
    applyEvent(st, frame(1, "message-appended", { envelope: envelope(0) }));
    applyEvent(st, frame(2, "session-created", { session: session("s1", { parent_id: "s0", fork_seq: 0 }) }));
    applyEvent(st, frame(3, "runstate-changed", { run_state: runState({ active_session: "s9" }) }));
    expect(JSON.stringify(st)).toBe(before);
  });
});

describe("snapshots and connection", () => {
  it("takes the active session from a run state snapshot", () => {
    const st = applySnapshots(initialState(), { runState: runState({ active_session: "s2" }) });
    expect(st.activeSession).toBe("s2");
  });

  it("treats anything but an open stream as read-only", () => {
    let st = initialState();
    expect(readOnly(st)).toBe(true);
    st = setConnection(st, "open");
    expect(readOnly(st)).toBe(false);
    st = setConnection(st, "closed");
    expect(readOnly(st)).toBe(true);
  });
});
