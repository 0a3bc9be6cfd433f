import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { reviewScreen, visibleNotice } from "../src/views/review.js";
import type { Study } from "../src/types.js";
import { fixture, scriptedFetch } from "./helpers.js";

const processed = fixture<Study>("study-processed");
const reviewed = fixture<Study>("study-reviewed");
const invalidState = fixture<{ code: string; message: string }>("error-invalid-state");

beforeEach(() => {
  document.body.innerHTML = "";
});

function allVerdicts(screen: ReturnType<typeof reviewScreen>): void {
  screen.setVerdict("AC", { verdict: "CONFIRMED", count: 1 });
  screen.setVerdict("BPD", { verdict: "NOT_PRESENT" });
  screen.setVerdict("HS", { verdict: "NOT_PRESENT" });
  screen.setVerdict("SS", { verdict: "NOT_PRESENT" });
  screen.setVerdict("FL", { verdict: "CONFIRMED", count: 1 });
}

describe("review screen", () => {
  it("renders a gallery group per plane with populated AC and FL", () => {
    const { fetchFn } = scriptedFetch([]);
    const screen = reviewScreen(new ApiClient("", "tok-dr1", fetchFn), processed,
      () => undefined);
    document.body.append(screen.root);

    const groups = [...document.querySelectorAll(".plane-group")];
    expect(groups.map((g) => g.getAttribute("data-label"))).toEqual(
      ["AC", "BPD", "HS", "SS", "FL"],
    );
    const acCards = document.querySelectorAll('[data-label="AC"] .keyframe-card');
    const flCards = document.querySelectorAll('[data-label="FL"] .keyframe-card');
    expect(acCards).toHaveLength(1);
    expect(flCards).toHaveLength(1);
    // verdict controls exist for all five planes regardless of detections
    expect(document.querySelectorAll(".verdict-controls")).toHaveLength(5);
    // video download link present
    const link = document.querySelector<HTMLAnchorElement>(".video-link");
    expect(link!.getAttribute("href")).toBe(`/api/v1/studies/${processed.id}/video`);
  });

  it("keyframe images come from the API by frame index", () => {
    const { fetchFn } = scriptedFetch([]);
    const screen = reviewScreen(new ApiClient("http://api", "tok", fetchFn), processed,
      () => undefined);
    document.body.append(screen.root);
    const sources = [...document.querySelectorAll<HTMLImageElement>(".keyframe-card img")]
      .map((img) => img.getAttribute("src"));
    const expected = processed.result!.keyframes.map(
      (k) => `http://api/api/v1/studies/${processed.id}/keyframes/${k.frame_index}.png`,
    );
    expect(sources).toEqual(expected);
  });

  it("blocks submission while any plane has no verdict", async () => {
    const { fetchFn, calls } = scriptedFetch([]);
    const screen = reviewScreen(new ApiClient("", "tok", fetchFn), processed,
      () => undefined);
    document.body.append(screen.root);
    screen.setVerdict("AC", { verdict: "CONFIRMED", count: 1 });
    await screen.submit();
    expect(calls).toHaveLength(0);
    expect(visibleNotice(screen.root)).toContain("veredicto");
  });

  it("successful submit posts the review and hands back the REVIEWED study", async () => {
    const { fetchFn, calls } = scriptedFetch([{ status: 200, body: reviewed }]);
    const outcomes: Study[] = [];
    const screen = reviewScreen(new ApiClient("", "tok-dr1", fetchFn), processed,
      (study) => outcomes.push(study));
    document.body.append(screen.root);
    allVerdicts(screen);
    screen.setFeedback("Buen barrido; el plano femoral es claro.");
    await screen.submit();

    expect(calls).toHaveLength(1);
    expect(calls[0].method).toBe("POST");
    expect(calls[0].url).toBe(`/api/v1/studies/${processed.id}/review`);
    const posted = JSON.parse(calls[0].body!);
    expect(posted.verdicts.AC).toEqual({ verdict: "CONFIRMED", count: 1 });
    expect(posted.verdicts.SS).toEqual({ verdict: "NOT_PRESENT" });
    expect(outcomes).toHaveLength(1);
    expect(outcomes[0].status).toBe("REVIEWED");
  });

  it("a 409 state conflict shows a non-destructive notice", async () => {
    const { fetchFn } = scriptedFetch([{ status: 409, body: invalidState }]);
    const outcomes: Study[] = [];
    const screen = reviewScreen(new ApiClient("", "tok-dr1", fetchFn), processed,
      (study) => outcomes.push(study));
    document.body.append(screen.root);
    allVerdicts(screen);
    await screen.submit();

    expect(outcomes).toHaveLength(0);
    expect(visibleNotice(screen.root)).toContain("cambió de estado");
    // the form survives: controls still present for a later attempt
    expect(document.querySelectorAll(".verdict-controls")).toHaveLength(5);
    expect(document.querySelector(".submit-review")).not.toBeNull();
  });
});
