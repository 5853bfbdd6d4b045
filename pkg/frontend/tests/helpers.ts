import { spawn, type ChildProcess } from "node:child_process";
import net from "node:net";

export async function waitFor(
  cond: () => boolean | Promise<boolean>,
  opts: { timeoutMs?: number; intervalMs?: number; label?: string } = {},
): Promise<void> {
  const deadline = Date.now() + (opts.timeoutMs ?? 20_000);
  for (;;) {
    if (await cond()) return;
    if (Date.now() > deadline) {
      throw new Error(`timed out waiting for ${opts.label ?? "condition"}`);
    }
    await new Promise((resolve) => setTimeout(resolve, opts.intervalMs ?? 50));
  }
}

export function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const addr = probe.address();
      const port = typeof addr === "object" && addr !== null ? addr.port : 0;
      probe.close(() => resolve(port));
    });
  });
}

export interface ServerHandle {
  port: number;
  base: string;
  child: ChildProcess;
  stop(): Promise<void>;
}

/** Spawns the real debug service for a shipped team and waits until it answers. */
export async function startServer(team: string, fixedPort?: number): Promise<ServerHandle> {
  const port = fixedPort ?? (await freePort());
  const child = spawn(
    "python3",
    ["-m", "backstep.cli", "serve", "--team", team, "--port", String(port)],
    // the team names resolve from package data, so any cwd works
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let log = "";
  child.stdout?.on("data", (chunk) => (log += chunk));
  child.stderr?.on("data", (chunk) => (log += chunk));

  const base = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30_000;
  for (;;) {
    if (child.exitCode !== null) {
      throw new Error(`service exited before becoming ready:\n${log}`);
    }
    try {
      const res = await fetch(`${base}/api/v1/state`);
      if (res.ok) break;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      child.kill("SIGKILL");
      throw new Error(`service not ready within 30s:\n${log}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }

  return {
    port,
    base,
    child,
    stop(): Promise<void> {
      return new Promise((resolve) => {
        if (child.exitCode !== null) return resolve();
        const hardKill = setTimeout(() => {
          child.kill("SIGKILL");
          resolve();
        }, 5_000);
        child.once("exit", () => {
          clearTimeout(hardKill);
          resolve();
        });
        child.kill("SIGTERM");
      });
    },
  };
}
