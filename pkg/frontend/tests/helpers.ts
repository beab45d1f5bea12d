// Shared plumbing for the UI tests: a node-http fetch shim (so requests
// bypass the DOM emulator's network stack), a live-service fixture spawned
// from serve_fixture.py, export helpers, and an in-memory Storage.

import { ChildProcess, execFileSync, spawn } from "node:child_process";
import * as fs from "node:fs";
import * as http from "node:http";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchInit, FetchLike, FetchResponse } from "../src/api.js";
import type { StorageLike } from "../src/drafts.js";

export const httpFetch: FetchLike = (url: string, init?: FetchInit) =>
  new Promise<FetchResponse>((resolve, reject) => {
    const req = http.request(
      url,
      { method: init?.method ?? "GET", headers: init?.headers ?? {} },
      (res) => {
        const chunks: Buffer[] = [];
        res.on("data", (c: Buffer) => chunks.push(c));
        res.on("end", () => {
          const text = Buffer.concat(chunks).toString("utf-8");
          resolve({
            status: res.statusCode ?? 0,
            json: async () => (text ? JSON.parse(text) : {}),
          });
        });
      },
    );
    req.on("error", reject);
    if (init?.body) req.write(init.body);
    req.end();
  });

export interface Fixture {
  base: string;
  token: string;
  store: string;
  main_batch: string;
  training_batch: string;
  proc: ChildProcess;
}

const FIXTURE_SCRIPT = path.join(
  path.dirname(fileURLToPath(import.meta.url)),
  "serve_fixture.py",
);

export async function startFixture(): Promise<Fixture> {
  const proc = spawn("python3", [FIXTURE_SCRIPT], {
    stdio: ["ignore", "pipe", "inherit"],
  });
  const firstLine = await new Promise<string>((resolve, reject) => {
    let buf = "";
    proc.stdout!.on("data", (chunk: Buffer) => {
      buf += chunk.toString("utf-8");
      const nl = buf.indexOf("\n");
      if (nl >= 0) resolve(buf.slice(0, nl));
    });
    proc.on("exit", (code) => reject(new Error(`fixture exited early (${code})`)));
    setTimeout(() => reject(new Error("fixture startup timed out")), 30_000);
  });
  const info = JSON.parse(firstLine) as Omit<Fixture, "proc">;
  await waitReady(info.base);
  return { ...info, proc };
}

async function waitReady(base: string): Promise<void> {
  for (let i = 0; i < 200; i++) {
    try {
      await httpFetch(`${base}/v1/batches`);
      return; // any HTTP status means the socket is up
    } catch {
      await new Promise((r) => setTimeout(r, 50));
    }
  }
  throw new Error(`service at ${base} never came up`);
}

export function stopFixture(f: Fixture): void {
  f.proc.kill("SIGTERM");
}

/** Run `annotate export` against the fixture's store; returns the out dir. */
export function exportStore(storePath: string, outDir: string): void {
  execFileSync(
    "python3",
    ["-m", "closeread", "annotate", "export", "--store", storePath, "--out", outDir],
    { stdio: "pipe" },
  );
}

/** Read one exported table, skipping the format header line. */
export function readTable(outDir: string, table: string): Array<Record<string, unknown>> {
  const lines = fs
    .readFileSync(path.join(outDir, `${table}.jsonl`), "utf-8")
    .split("\n")
    .filter((l) => l.trim() !== "");
  return lines.slice(1).map((l) => JSON.parse(l) as Record<string, unknown>);
}

export class MemoryStorage implements StorageLike {
  private map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.has(key) ? this.map.get(key)! : null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
}
