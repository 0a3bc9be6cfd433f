/**
 * Specialist review screen: key frames grouped by plane with the confidences
 * reported by the pipeline, one CONFIRMED/NOT_PRESENT verdict per plane, free
 * text feedback, and the original video download link. Every number shown is
 * read from the study payload; nothing clinical is computed here.
 */

import { ApiClient, ApiError } from "../api.js";
import { el, formatConfidence } from "../dom.js";
import { t } from "../i18n.js";
import type { KeyFrame, PlaneLabel, ReviewSubmission, Study, Verdict } from "../types.js";
import { PLANE_LABELS } from "../types.js";

export interface ReviewScreenHandles {
  root: HTMLElement;
  setVerdict(label: PlaneLabel, verdict: Verdict): void;
  setFeedback(text: string): void;
  submit(): Promise<void>;
}

function keyframeCard(api: ApiClient, study: Study, frame: KeyFrame): HTMLElement {
  return el(
    "figure",
    { class: "keyframe-card", "data-frame-index": String(frame.frame_index) },
    el("img", {
      src: api.keyframeUrl(study.id, frame.frame_index),
      alt: `${frame.label} @ ${frame.frame_index}`,
      loading: "lazy",
    }),
    el(
      "figcaption",
      {},
      `#${frame.frame_index} · ${t("review.confidence")} `,
      el("span", { class: "confidence" }, formatConfidence(frame.confidence)),
    ),
  );
}

export function reviewScreen(
  api: ApiClient,
  study: Study,
  onReviewed: (study: Study) => void,
): ReviewScreenHandles {
  const verdicts = new Map<PlaneLabel, Verdict>();
  let feedback = "";

  const notice = el("p", { class: "notice", hidden: "" });
  const groups = study.result
    ? PLANE_LABELS.map((label) => {
        const frames = study.result!.keyframes.filter((k) => k.label === label);
        const gallery = frames.length
          ? el("div", { class: "gallery" }, ...frames.map((f) => keyframeCard(api, study, f)))
          : el("p", { class: "empty-state" }, t("review.noKeyframes"));
        return el(
          "section",
          { class: "plane-group", "data-label": label },
          el("h3", {}, `${label} (${study.result!.label_counts[label]})`),
          gallery,
          verdictControls(label),
        );
      })
    : [];

  function verdictControls(label: PlaneLabel): HTMLElement {
    const countInput = el("input", {
      type: "number",
      min: "0",
      value: "1",
      class: "verdict-count",
      "aria-label": `${label} ${t("review.count")}`,
    });
    countInput.disabled = true;
    const confirmed = el("input", { type: "radio", name: `verdict-${label}`, value: "CONFIRMED" });
    const notPresent = el("input", { type: "radio", name: `verdict-${label}`, value: "NOT_PRESENT" });
    confirmed.addEventListener("change", () => {
      countInput.disabled = false;
      verdicts.set(label, { verdict: "CONFIRMED", count: Number(countInput.value) });
    });
    countInput.addEventListener("change", () => {
      verdicts.set(label, { verdict: "CONFIRMED", count: Number(countInput.value) });
    });
    notPresent.addEventListener("change", () => {
      countInput.disabled = true;
      verdicts.set(label, { verdict: "NOT_PRESENT" });
    });
    return el(
      "div",
      { class: "verdict-controls", "data-verdict-for": label },
      el("label", {}, confirmed, t("review.confirmed")),
      countInput,
      el("label", {}, notPresent, t("review.notPresent")),
    );
  }

  const feedbackInput = el("textarea", {
    class: "feedback-input",
    rows: "4",
    "aria-label": t("review.feedback"),
  });
  feedbackInput.addEventListener("input", () => {
    feedback = feedbackInput.value;
  });

  async function submit(): Promise<void> {
    notice.hidden = true;
    if (PLANE_LABELS.some((label) => !verdicts.has(label))) {
      notice.textContent = t("review.incomplete");
      notice.className = "notice notice-error";
      notice.hidden = false;
      return;
    }
    const submission: ReviewSubmission = {
      verdicts: Object.fromEntries(verdicts) as Record<PlaneLabel, Verdict>,
      feedback,
    };
    try {
      onReviewed(await api.submitReview(study.id, submission));
    } catch (error) {
      // a state conflict is informational; the form stays editable
      notice.textContent =
        error instanceof ApiError && error.status === 409
          ? t("review.conflict")
          : error instanceof Error
            ? error.message
            : String(error);
      notice.className = "notice notice-error";
      notice.hidden = false;
    }
  }

  const submitButton = el("button", { type: "button", class: "submit-review" }, t("review.submit"));
  submitButton.addEventListener("click", () => void submit());

  const root = el(
    "article",
    { class: "review-screen", "data-study-id": study.id },
    el("h2", {}, `${t("review.title")} ${study.id.slice(0, 8)}`),
    el("a", { class: "video-link", href: api.videoUrl(study.id), download: "" },
      t("review.downloadVideo")),
    ...groups,
    el("label", {}, t("review.feedback"), feedbackInput),
    submitButton,
    notice,
  );

  return {
    root,
    setVerdict(label, verdict) {
      verdicts.set(label, verdict);
    },
    setFeedback(text) {
      feedback = text;
    },
    submit,
  };
}

export function visibleNotice(root: HTMLElement): string {
  const node = root.querySelector<HTMLElement>(".notice");
  return node && !node.hidden ? node.textContent ?? "" : "";
}
