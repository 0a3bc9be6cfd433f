/**
 * Contract guarantees against the recorded API responses: every number the UI
 * shows originates from a payload field (formatted, never recomputed), and
 * polling never stacks requests.
 */

import { readdirSync, readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { formatConfidence } from "../src/dom.js";
import { StudyListPoller } from "../src/poll.js";
import { reviewScreen } from "../src/views/review.js";
import { studyList } from "../src/views/studies.js";
import type { Study } from "../src/types.js";
import { fixture, gatedFetch, scriptedFetch } from "./helpers.js";

const processed = fixture<Study>("study-processed");

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("no clinical computation client-side", () => {
  it("every rendered confidence equals the payload value, formatted", () => {
    const { fetchFn } = scriptedFetch([]);
    const screen = reviewScreen(new ApiClient("", "tok", fetchFn), processed,
      () => undefined);
    document.body.append(screen.root);
    const rendered = [...document.querySelectorAll(".confidence")].map(
      (n) => n.textContent,
    );
    const fromPayload = processed.result!.keyframes.map((k) =>
      formatConfidence(k.confidence),
    );
    expect(rendered).toEqual(fromPayload);
  });

  it("group headings carry the payload label counts, not recounted values", () => {
    const { fetchFn } = scriptedFetch([]);
    const screen = reviewScreen(new ApiClient("", "tok", fetchFn), processed,
      () => undefined);
    document.body.append(screen.root);
    for (const [label, count] of Object.entries(processed.result!.label_counts)) {
      const heading = document.querySelector(`[data-label="${label}"] h3`);
      expect(heading!.textContent).toBe(`${label} (${count})`);
    }
  });

  it("view modules never do arithmetic on payload numbers", () => {
    // the probability/count fields may be formatted but never combined;
    // arithmetic operators next to those field names would be a smell
    const viewsDir = join(dirname(fileURLToPath(import.meta.url)), "..", "src", "views");
    const sources = readdirSync(viewsDir)
      .filter((name) => name.endsWith(".ts"))
      .map((name) => readFileSync(join(viewsDir, name), "utf-8"))
      .join("\n");
    for (const field of ["confidence", "probs", "label_counts", "count"]) {
      const pattern = new RegExp(`\\.${field}\\s*[-+*/]|[-+*/]\\s*\\w*\\.${field}`, "g");
      expect(sources.match(pattern)).toBeNull();
    }
  });
});

describe("status polling", () => {
  it("polls on the configured interval and dedups overlapping ticks", async () => {
    vi.useFakeTimers();
    try {
      const { fetchFn, calls, release } = gatedFetch([]);
      const api = new ApiClient("", "tok", fetchFn);
      const seen: Study[][] = [];
      const poller = new StudyListPoller(api, (studies) => seen.push(studies),
        () => undefined, 5000);
      poller.start();
      expect(calls).toHaveLength(1);
      // three intervals pass while the first request is still in flight
      await vi.advanceTimersByTimeAsync(15000);
      expect(calls).toHaveLength(1);
      release();
      await vi.advanceTimersByTimeAsync(5000);
      expect(calls).toHaveLength(2);
      poller.stop();
      await vi.advanceTimersByTimeAsync(20000);
      expect(calls).toHaveLength(2);
    } finally {
      vi.useRealTimers();
    }
  });

  it("the default interval is five seconds", async () => {
    const { POLL_INTERVAL_MS } = await import("../src/poll.js");
    expect(POLL_INTERVAL_MS).toBe(5000);
  });
});

describe("status badges from recorded lists", () => {
  it.each([
    ["studies-list-queued", "QUEUED"],
    ["studies-list-reviewed", "REVIEWED"],
  ])("%s renders %s badges", (name, status) => {
    const studies = fixture<Study[]>(name);
    const container = document.createElement("div");
    document.body.append(container);
    studyList(container, studies);
    const badge = container.querySelector(".badge");
    expect(badge!.getAttribute("data-status")).toBe(status);
  });
});
