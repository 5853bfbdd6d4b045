/**
 * Server-sent-events client on top of fetch streaming.
 *
 * EventSource would do, but jsdom and node lack it and it cannot set a
 * since-cursor without cooperation from the URL anyway.  A hand-rolled
 * parser keeps the dependency surface at zero and lets the reconnect loop
 * resume from the last event id it actually delivered.
 */

export interface StreamEvent {
  id: number;
  event: string;
  data: unknown;
}

export type ConnectionStatus = "connecting" | "open" | "closed";

/**
 * Incremental SSE parser.  Feed it chunks; it fires onFrame per complete
 * frame and returns the unconsumed tail to pass back in with the next chunk.
 * Comment frames (leading ':') are keepalives and are dropped.
 */
export function feedSse(
  buffer: string,
  chunk: string,
  onFrame: (frame: StreamEvent) => void,
): string {
  let data = buffer + chunk;
  for (;;) {
    const cut = data.indexOf("\n\n");
    if (cut < 0) return data;
    const block = data.slice(0, cut);
    data = data.slice(cut + 2);
    const frame: { id?: string; event?: string; data?: string } = {};
    for (const line of block.split("\n")) {
      if (!line || line.startsWith(":")) continue;
      const sep = line.indexOf(": ");
      if (sep < 0) continue;
      const key = line.slice(0, sep);
      const value = line.slice(sep + 2);
      if (key === "id" || key === "event" || key === "data") frame[key] = value;
    }
    if (frame.id === undefined || frame.event === undefined) continue;
    let parsed: unknown = null;
    try {
      parsed = frame.data === undefined ? null : JSON.parse(frame.data);
    } catch {
      parsed = frame.data;
    }
    onFrame({ id: Number(frame.id), event: frame.event, data: parsed });
  }
}

export interface EventStreamOpts {
  since?: number;
  onEvent: (frame: StreamEvent) => void;
  onStatus?: (status: ConnectionStatus) => void;
  /** Delay before reconnecting after a drop, in ms. */
  retryMs?: number;
  fetchFn?: typeof fetch;
}

export class EventStream {
  lastId: number;
  private stopped = false;
  private controller: AbortController | null = null;
  private retryMs: number;
  private fetchFn: typeof fetch;

  constructor(
    private urlFor: (since: number) => string,
    private opts: EventStreamOpts,
  ) {
    this.lastId = opts.since ?? 0;
    this.retryMs = opts.retryMs ?? 1000;
    this.fetchFn = opts.fetchFn ?? ((...args) => fetch(...args));
  }

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      this.opts.onStatus?.("connecting");
      this.controller = new AbortController();
      try {
        const response = await this.fetchFn(this.urlFor(this.lastId), {
          signal: this.controller.signal,
          headers: { accept: "text/event-stream" },
        });
        if (!response.ok || !response.body) throw new Error(`status ${response.status}`);
        this.opts.onStatus?.("open");
        const reader = response.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer = feedSse(buffer, decoder.decode(value, { stream: true }), (frame) => {
            this.lastId = frame.id;
            this.opts.onEvent(frame);
          });
        }
      } catch {
        // fall through to the retry sleep
      }
      if (this.stopped) break;
      this.opts.onStatus?.("closed");
      await new Promise((resolve) => setTimeout(resolve, this.retryMs));
    }
    this.opts.onStatus?.("closed");
  }
}
