import { beforeEach, describe, expect, it } from "vitest";

import { feedbackView } from "../src/views/feedback.js";
import type { Study } from "../src/types.js";
import { fixture } from "./helpers.js";

const reviewed = fixture<Study>("study-reviewed");

beforeEach(() => {
  document.body.innerHTML = "<section id='c'></section>";
});

describe("feedback view", () => {
  it("renders the specialist feedback text verbatim", () => {
    const container = document.getElementById("c")!;
    feedbackView(container, [reviewed]);
    const quote = container.querySelector(".feedback-text");
    expect(quote!.textContent).toBe(reviewed.review!.feedback);
    expect(quote!.textContent).toBe("Buen barrido; el plano femoral es claro.");
  });

  it("verdicts match the API payload exactly", () => {
    const container = document.getElementById("c")!;
    feedbackView(container, [reviewed]);
    const markers = [...container.querySelectorAll("[data-verdict]")].map((n) =>
      n.getAttribute("data-verdict"),
    );
    const expected = Object.entries(reviewed.review!.verdicts).map(
      ([label, v]) => `${label}:${v.verdict}`,
    );
    expect(markers.sort()).toEqual(expected.sort());
    expect(container.textContent).toContain("AC: Confirmado (1 cuadros)");
    expect(container.textContent).toContain("BPD: No presente");
  });

  it("shows the empty state without reviewed studies", () => {
    const container = document.getElementById("c")!;
    feedbackView(container, []);
    expect(container.querySelector(".empty-state")).not.toBeNull();
  });

  it("ignores studies that are not yet reviewed", () => {
    const container = document.getElementById("c")!;
    feedbackView(container, [fixture<Study>("study-processed")]);
    expect(container.querySelector(".feedback-entry")).toBeNull();
  });
});
