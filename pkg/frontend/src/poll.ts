/**
 * Five-second status polling for the operator's study list. A tick that is
 * still in flight when the next one fires is skipped (the ApiClient also
 * dedups concurrent GETs per path, so slow links never stack requests).
 */

import type { ApiClient } from "./api.js";
import type { Study } from "./types.js";

export const POLL_INTERVAL_MS = 5000;

type Timer = ReturnType<typeof setInterval>;

export class StudyListPoller {
  private timer: Timer | null = null;
  private busy = false;

  constructor(
    private readonly api: ApiClient,
    private readonly onUpdate: (studies: Study[]) => void,
    private readonly onError: (error: unknown) => void = () => undefined,
    private readonly intervalMs: number = POLL_INTERVAL_MS,
  ) {}

  async tick(): Promise<void> {
    if (this.busy) {
      return;
    }
    this.busy = true;
    try {
      this.onUpdate(await this.api.listStudies());
    } catch (error) {
      this.onError(error);
    } finally {
      this.busy = false;
    }
  }

  start(): void {
    if (this.timer !== null) {
      return;
    }
    void this.tick();
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
