/**
 * Typed client for the review service. Every network call in the app goes
 * through this module; views never touch fetch directly.
 *
 * Concurrent GETs for the same resource are deduplicated: while a request is
 * in flight, further callers share its promise instead of issuing another.
 */

import type {
  ApiErrorBody,
  Health,
  ReviewSubmission,
  Study,
  StudyStatus,
  Trajectory,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly studyId?: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface UploadProgress {
  loaded: number;
  total: number;
}

/** Minimal XHR surface so tests can inject a scripted transport. */
export interface UploadTransport {
  send(
    url: string,
    headers: Record<string, string>,
    body: FormData,
    onProgress: (p: UploadProgress) => void,
  ): Promise<{ status: number; body: string }>;
}

function xhrTransport(): UploadTransport {
  return {
    send(url, headers, body, onProgress) {
      return new Promise((resolve, reject) => {
        const xhr = new XMLHttpRequest();
        xhr.open("POST", url);
        for (const [key, value] of Object.entries(headers)) {
          xhr.setRequestHeader(key, value);
        }
        xhr.upload.addEventListener("progress", (event) => {
          if (event.lengthComputable) {
            onProgress({ loaded: event.loaded, total: event.total });
          }
        });
        xhr.addEventListener("load", () =>
          resolve({ status: xhr.status, body: xhr.responseText }),
        );
        xhr.addEventListener("error", () => reject(new Error("network error")));
        xhr.send(body);
      });
    },
  };
}

async function parseError(status: number, text: string): Promise<never> {
  let body: ApiErrorBody = { code: "unknown", message: text || `HTTP ${status}` };
  try {
    body = JSON.parse(text) as ApiErrorBody;
  } catch {
    // non-JSON error body; keep the fallback
  }
  throw new ApiError(status, body.code, body.message, body.study_id);
}

export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
    private readonly uploadTransport: UploadTransport = xhrTransport(),
  ) {}

  private headers(): Record<string, string> {
    return { Authorization: `Bearer ${this.token}` };
  }

  private async getJson<T>(path: string): Promise<T> {
    const key = path;
    const pending = this.inflight.get(key);
    if (pending) {
      return pending as Promise<T>;
    }
    const request = (async () => {
      const response = await this.fetchFn(`${this.baseUrl}${path}`, {
        headers: this.headers(),
      });
      const text = await response.text();
      if (!response.ok) {
        await parseError(response.status, text);
      }
      return JSON.parse(text) as T;
    })().finally(() => this.inflight.delete(key));
    this.inflight.set(key, request);
    return request;
  }

  health(): Promise<Health> {
    return this.getJson("/api/v1/health");
  }

  listStudies(params: { status?: StudyStatus; pendingReview?: boolean } = {}): Promise<Study[]> {
    const query = new URLSearchParams();
    if (params.status) query.set("status", params.status);
    if (params.pendingReview) query.set("pending_review", "true");
    const suffix = query.toString() ? `?${query.toString()}` : "";
    return this.getJson(`/api/v1/studies${suffix}`);
  }

  getStudy(id: string): Promise<Study> {
    return this.getJson(`/api/v1/studies/${id}`);
  }

  async uploadStudy(
    trajectory: Trajectory,
    video: File | Blob,
    onProgress: (p: UploadProgress) => void = () => undefined,
  ): Promise<Study> {
    const form = new FormData();
    form.append("metadata", JSON.stringify({ trajectory }));
    form.append("video", video, video instanceof File ? video.name : "sweep.zip");
    const { status, body } = await this.uploadTransport.send(
      `${this.baseUrl}/api/v1/studies`,
      this.headers(),
      form,
      onProgress,
    );
    if (status !== 201) {
      await parseError(status, body);
    }
    return JSON.parse(body) as Study;
  }

  async submitReview(studyId: string, review: ReviewSubmission): Promise<Study> {
    const response = await this.fetchFn(`${this.baseUrl}/api/v1/studies/${studyId}/review`, {
      method: "POST",
      headers: { ...this.headers(), "Content-Type": "application/json" },
      body: JSON.stringify(review),
    });
    const text = await response.text();
    if (!response.ok) {
      await parseError(response.status, text);
    }
    return JSON.parse(text) as Study;
  }

  videoUrl(studyId: string): string {
    return `${this.baseUrl}/api/v1/studies/${studyId}/video`;
  }

  keyframeUrl(studyId: string, frameIndex: number): string {
    return `${this.baseUrl}/api/v1/studies/${studyId}/keyframes/${frameIndex}.png`;
  }
}
