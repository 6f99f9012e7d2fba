// Shared test scaffolding: boots the real HTTP service on a scratch data
// directory, ingests a deterministic fixture CSV, and hands back a typed
// client. Tests exercise the view models against live responses.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { ApiClient } from "../src/api";

export interface TestService {
  baseUrl: string;
  datasetId: string;
  api: ApiClient;
  stop(): Promise<void>;
}

// Small deterministic PRNG so the fixture is identical on every run.
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function normalish(rand: () => number): number {
  let sum = 0;
  for (let i = 0; i < 8; i++) sum += rand();
  return (sum - 4) * Math.sqrt(1.5); // mean 0, roughly unit variance
}

export const FIXTURE_ROWS = 160;
export const FIXTURE_OUTLIER_VALUE = 50;
export const FIXTURE_OUTLIER_COUNT = 18;

/**
 * Five numeric columns and one categorical:
 *   base    reference series
 *   copy    exact duplicate of base (correlation exactly 1, slope 1)
 *   trend   0.8*base + 0.6*noise2 (mid-strength correlation)
 *   noise   independent
 *   out     independent with FIXTURE_OUTLIER_COUNT planted extremes
 *   label   a/b/c at roughly 70/20/10
 */
export function fixtureCsv(): string {
  const rand = mulberry32(20240825);
  const lines = ["base,copy,trend,noise,out,label"];
  for (let i = 0; i < FIXTURE_ROWS; i++) {
    const base = normalish(rand);
    const trend = 0.8 * base + 0.6 * normalish(rand);
    const noise = normalish(rand);
    const out = i < FIXTURE_OUTLIER_COUNT ? FIXTURE_OUTLIER_VALUE : normalish(rand);
    const u = rand();
    const label = u < 0.7 ? "a" : u < 0.9 ? "b" : "c";
    lines.push(
      [base, base, trend, noise, out].map((v) => v.toFixed(6)).join(",") + `,${label}`,
    );
  }
  return lines.join("\n") + "\n";
}

// Hand-rolled multipart body: works identically under the node and jsdom
// environments, where the Blob/FormData globals differ.
export async function ingestCsv(baseUrl: string, csv: string): Promise<string> {
  const boundary = "----guidepost-fixture";
  const body =
    `--${boundary}\r\n` +
    `content-disposition: form-data; name="file"; filename="fixture.csv"\r\n` +
    `content-type: text/csv\r\n\r\n` +
    csv +
    `\r\n--${boundary}--\r\n`;
  const response = await fetch(`${baseUrl}/datasets`, {
    method: "POST",
    headers: { "content-type": `multipart/form-data; boundary=${boundary}` },
    body,
  });
  if (!response.ok) {
    throw new Error(`ingest failed (${response.status}): ${await response.text()}`);
  }
  const doc = (await response.json()) as { dataset_id: string };
  return doc.dataset_id;
}

async function waitForServer(baseUrl: string, proc: ChildProcess): Promise<void> {
  const deadline = Date.now() + 30_000;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited early with code ${proc.exitCode}`);
    }
    try {
      const response = await fetch(`${baseUrl}/datasets/none/columns`);
      if (response.status > 0) return;
    } catch (err) {
      lastError = err;
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error(`service did not come up: ${lastError}`);
}

export async function startService(): Promise<TestService> {
  const dataDir = mkdtempSync(join(tmpdir(), "guidepost-ui-"));
  for (let attempt = 0; attempt < 3; attempt++) {
    const port = 21000 + Math.floor(Math.random() * 20000);
    const baseUrl = `http://127.0.0.1:${port}`;
    const proc = spawn(
      "guidepost",
      ["serve", "--addr", `127.0.0.1:${port}`, "--registry", dataDir],
      {
        env: {
          ...process.env,
          GUIDEPOST_SYNC_BUILD: "1",
          GUIDEPOST_K: "256",
          GUIDEPOST_RESERVOIR: "512",
          GUIDEPOST_HEAVY_CAPACITY: "64",
        },
        stdio: ["ignore", "ignore", "pipe"],
      },
    );
    let stderr = "";
    proc.stderr?.on("data", (chunk) => {
      stderr += String(chunk);
    });
    try {
      await waitForServer(baseUrl, proc);
    } catch (err) {
      proc.kill();
      if (attempt === 2) throw new Error(`${err}\nservice stderr:\n${stderr}`);
      continue;
    }
    const api = new ApiClient(baseUrl);
    const datasetId = await ingestCsv(baseUrl, fixtureCsv());
    return {
      baseUrl,
      datasetId,
      api,
      stop: async () => {
        proc.kill();
        await new Promise((resolve) => setTimeout(resolve, 100));
        rmSync(dataDir, { recursive: true, force: true });
      },
    };
  }
  throw new Error("unreachable");
}
