import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { UploadProgress, UploadTransport } from "../src/api.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), "utf-8")) as T;
}

export interface RecordedCall {
  url: string;
  method: string;
  headers: Record<string, string>;
  body?: string;
}

type Scripted = { status: number; body: unknown } | { networkError: true };

/** fetch double that replays scripted responses and records every call. */
export function scriptedFetch(script: Scripted[]) {
  const calls: RecordedCall[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const step = script.shift();
    if (!step) {
      throw new Error(`unexpected fetch: ${String(input)}`);
    }
    calls.push({
      url: String(input),
      method: init?.method ?? "GET",
      headers: (init?.headers ?? {}) as Record<string, string>,
      body: typeof init?.body === "string" ? init.body : undefined,
    });
    if ("networkError" in step) {
      throw new TypeError("fetch failed");
    }
    return new Response(JSON.stringify(step.body), { status: step.status });
  }) as typeof fetch;
  return { fetchFn, calls };
}

/** fetch double that resolves when told to, for in-flight dedup tests. */
export function gatedFetch(body: unknown) {
  const calls: string[] = [];
  let release!: () => void;
  const gate = new Promise<void>((resolve) => {
    release = resolve;
  });
  const fetchFn = (async (input: RequestInfo | URL) => {
    calls.push(String(input));
    await gate;
    return new Response(JSON.stringify(body), { status: 200 });
  }) as typeof fetch;
  return { fetchFn, calls, release: () => release() };
}

type UploadStep = { status: number; body: unknown } | { networkError: true };

/** upload transport double with progress playback and scripted outcomes. */
export function scriptedUpload(script: UploadStep[]) {
  const sends: { url: string; headers: Record<string, string>; body: FormData }[] = [];
  const transport: UploadTransport = {
    async send(url, headers, body, onProgress) {
      sends.push({ url, headers, body });
      const step = script.shift();
      if (!step) {
        throw new Error("unexpected upload");
      }
      onProgress({ loaded: 1, total: 2 } satisfies UploadProgress);
      onProgress({ loaded: 2, total: 2 } satisfies UploadProgress);
      if ("networkError" in step) {
        throw new Error("network error");
      }
      return { status: step.status, body: JSON.stringify(step.body) };
    },
  };
  return { transport, sends };
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
