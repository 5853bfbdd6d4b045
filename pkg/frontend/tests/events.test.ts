import { describe, expect, it } from "vitest";
import { EventStream, feedSse, type StreamEvent } from "../src/events.js";

function collect(): { frames: StreamEvent[]; sink: (f: StreamEvent) => void } {
  const frames: StreamEvent[] = [];
  return { frames, sink: (f) => frames.push(f) };
}

describe("feedSse", () => {
  it("parses a complete frame", () => {
    const { frames, sink } = collect();
    const rest = feedSse("", 'id: 3\nevent: queue-changed\ndata: {"queue":[]}\n\n', sink);
    expect(rest).toBe("");
    expect(frames).toEqual([{ id: 3, event: "queue-changed", data: { queue: [] } }]);
  });

  it("holds partial frames until the terminator arrives", () => {
    const { frames, sink } = collect();
    let buf = feedSse("", "id: 1\neve", sink);
    expect(frames).toHaveLength(0);
    expect(buf).toBe("id: 1\neve");
    buf = feedSse(buf, 'nt: runstate-changed\ndata: {"run_state":{"mode":"paused"}}\n', sink);
    expect(frames).toHaveLength(0);
    buf = feedSse(buf, "\n", sink);
    expect(buf).toBe("");
    expect(frames).toHaveLength(1);
    expect(frames[0]!.event).toBe("runstate-changed");
    expect((frames[0]!.data as { run_state: { mode: string } }).run_state.mode).toBe("paused");
  });

  it("splits cleanly even when the terminator straddles chunks", () => {
    const { frames, sink } = collect();
    let buf = feedSse("", "id: 1\nevent: a\ndata: 1\n", sink);
    buf = feedSse(buf, "\nid: 2\nevent: b\ndata: 2\n\n", sink);
    expect(buf).toBe("");
    expect(frames.map((f) => f.id)).toEqual([1, 2]);
  });

  it("drops comment keepalives and the hello line", () => {
    const { frames, sink } = collect();
    const rest = feedSse("", ": stream open\n\n: keepalive\n\nid: 7\nevent: x\ndata: null\n\n", sink);
    expect(rest).toBe("");
    expect(frames).toEqual([{ id: 7, event: "x", data: null }]);
  });

  it("parses several frames from one chunk in order", () => {
    const { frames, sink } = collect();
    feedSse("", "id: 1\nevent: a\ndata: {}\n\nid: 2\nevent: b\ndata: {}\n\nid: 3\nevent: c\ndata: {}\n\n", sink);
    expect(frames.map((f) => f.id)).toEqual([1, 2, 3]);
  });

  it("passes non-JSON data through as raw text", () => {
    const { frames, sink } = collect();
    feedSse("", "id: 4\nevent: x\ndata: not json\n\n", sink);
    expect(frames[0]!.data).toBe("not json");
  });

  it("ignores blocks missing an id or event", () => {
    const { frames, sink } = collect();
    feedSse("", "data: {}\n\nevent: x\ndata: {}\n\nid: 9\ndata: {}\n\n", sink);
    expect(frames).toHaveLength(0);
  });
});

function chunkedBody(chunks: string[]) {
  const encoder = new TextEncoder();
  let i = 0;
  return {
    getReader() {
      return {
        read(): Promise<{ done: boolean; value?: Uint8Array }> {
          if (i < chunks.length) {
            return Promise.resolve({ done: false, value: encoder.encode(chunks[i++]!) });
          }
          return Promise.resolve({ done: true });
        },
      };
    },
  };
}

describe("EventStream", () => {
  it("reconnects from the last delivered id", async () => {
    const urls: string[] = [];
    const bodies = [
      chunkedBody(['id: 1\nevent: a\ndata: {"n":1}\n\n', 'id: 2\nevent: b\ndata: {"n":2}\n\n']),
      chunkedBody(['id: 3\nevent: c\ndata: {"n":3}\n\n']),
    ];
    let call = 0;
    const fetchFn = ((url: unknown) => {
      urls.push(String(url));
      const body = bodies[Math.min(call, bodies.length - 1)];
      call += 1;
      return Promise.resolve({ ok: true, body } as unknown as Response);
    }) as typeof fetch;

    const frames: StreamEvent[] = [];
    const statuses: string[] = [];
    const stream = new EventStream((since) => `/api/v1/events?since=${since}`, {
      onEvent: (frame) => frames.push(frame),
      onStatus: (status) => statuses.push(status),
      retryMs: 5,
      fetchFn,
    });
    stream.start();
    await waitUntil(() => frames.length >= 3);
    stream.stop();

    expect(frames.map((f) => f.id)).toEqual([1, 2, 3]);
    expect(urls[0]).toBe("/api/v1/events?since=0");
    expect(urls[1]).toBe("/api/v1/events?since=2");
    expect(statuses).toContain("open");
    expect(statuses).toContain("closed");
  });

  it("surfaces closed status while the endpoint is failing", async () => {
    const statuses: string[] = [];
    const fetchFn = (() => Promise.reject(new Error("refused"))) as unknown as typeof fetch;
    const stream = new EventStream(() => "/api/v1/events?since=0", {
      onEvent: () => {},
      onStatus: (status) => statuses.push(status),
      retryMs: 5,
      fetchFn,
    });
    stream.start();
    await waitUntil(() => statuses.filter((s) => s === "closed").length >= 2);
    stream.stop();
    expect(statuses[0]).toBe("connecting");
    expect(statuses).not.toContain("open");
  });
});

async function waitUntil(cond: () => boolean, timeoutMs = 5_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!cond()) {
    if (Date.now() > deadline) throw new Error("condition never became true");
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
}
