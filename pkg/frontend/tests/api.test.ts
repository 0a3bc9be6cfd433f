import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import type { Study } from "../src/types.js";
import { fixture, gatedFetch, scriptedFetch, scriptedUpload } from "./helpers.js";

const queued = fixture<Study>("study-queued");

describe("ApiClient", () => {
  it("sends the bearer token on every request", async () => {
    const { fetchFn, calls } = scriptedFetch([{ status: 200, body: [] }]);
    const api = new ApiClient("http://api", "tok-op1", fetchFn);
    await api.listStudies();
    expect(calls[0].headers.Authorization).toBe("Bearer tok-op1");
    expect(calls[0].url).toBe("http://api/api/v1/studies");
  });

  it("maps error bodies onto ApiError", async () => {
    const { fetchFn } = scriptedFetch([
      { status: 403, body: fixture("error-unauthorized") },
    ]);
    const api = new ApiClient("", "bad-token", fetchFn);
    const failure = await api.listStudies().catch((e: unknown) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect((failure as ApiError).status).toBe(403);
    expect((failure as ApiError).code).toBe("unauthorized");
  });

  it("carries the study id from error bodies", async () => {
    const { fetchFn } = scriptedFetch([
      { status: 404, body: fixture("error-not-found") },
    ]);
    const api = new ApiClient("", "tok", fetchFn);
    const failure = await api.getStudy("does-not-exist").catch((e: unknown) => e);
    expect((failure as ApiError).studyId).toBe("does-not-exist");
  });

  it("dedups concurrent GETs for the same resource", async () => {
    const { fetchFn, calls, release } = gatedFetch(queued);
    const api = new ApiClient("", "tok", fetchFn);
    const first = api.getStudy(queued.id);
    const second = api.getStudy(queued.id);
    release();
    const [a, b] = await Promise.all([first, second]);
    expect(calls).toHaveLength(1);
    expect(a.id).toBe(queued.id);
    expect(b.id).toBe(queued.id);
  });

  it("does not dedup distinct resources", async () => {
    const { fetchFn, calls, release } = gatedFetch(queued);
    const api = new ApiClient("", "tok", fetchFn);
    const first = api.getStudy("one");
    const second = api.getStudy("two");
    release();
    await Promise.all([first, second]);
    expect(calls).toHaveLength(2);
  });

  it("issues a fresh request after the previous one settles", async () => {
    const { fetchFn, calls } = scriptedFetch([
      { status: 200, body: queued },
      { status: 200, body: queued },
    ]);
    const api = new ApiClient("", "tok", fetchFn);
    await api.getStudy(queued.id);
    await api.getStudy(queued.id);
    expect(calls).toHaveLength(2);
  });

  it("uploads multipart form data and reports progress", async () => {
    const { transport, sends } = scriptedUpload([{ status: 201, body: queued }]);
    const api = new ApiClient("http://api", "tok-op1", undefined as never, transport);
    const seen: number[] = [];
    const study = await api.uploadStudy("VERTICAL", new Blob([new Uint8Array(8)]),
      (p) => seen.push(p.loaded / p.total));
    expect(study.status).toBe("QUEUED");
    expect(seen).toEqual([0.5, 1]);
    expect(sends[0].url).toBe("http://api/api/v1/studies");
    expect(sends[0].headers.Authorization).toBe("Bearer tok-op1");
    expect(JSON.parse(sends[0].body.get("metadata") as string)).toEqual({
      trajectory: "VERTICAL",
    });
  });

  it("builds keyframe and video URLs from payload fields only", () => {
    const api = new ApiClient("http://api", "tok");
    expect(api.keyframeUrl(queued.id, 12)).toBe(
      `http://api/api/v1/studies/${queued.id}/keyframes/12.png`,
    );
    expect(api.videoUrl(queued.id)).toBe(`http://api/api/v1/studies/${queued.id}/video`);
  });
});
