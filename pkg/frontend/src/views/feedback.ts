/**
 * Operator feedback history: reviewed studies with per-plane verdicts and the
 * specialist's note, rendered verbatim from the payload.
 */

import { clear, el } from "../dom.js";
import { t } from "../i18n.js";
import type { Study } from "../types.js";
import { PLANE_LABELS } from "../types.js";

export function feedbackView(container: HTMLElement, studies: Study[]): void {
  clear(container);
  container.append(el("h2", {}, t("feedback.title")));
  const reviewed = studies.filter((s) => s.status === "REVIEWED" && s.review);
  if (!reviewed.length) {
    container.append(el("p", { class: "empty-state" }, t("feedback.empty")));
    return;
  }
  for (const study of reviewed) {
    const review = study.review!;
    const verdictItems = PLANE_LABELS.map((label) => {
      const verdict = review.verdicts[label];
      const text =
        verdict.verdict === "CONFIRMED"
          ? `${label}: ${t("review.confirmed")} (${verdict.count} ${t("review.count")})`
          : `${label}: ${t("review.notPresent")}`;
      return el("li", { "data-verdict": `${label}:${verdict.verdict}` }, text);
    });
    container.append(
      el(
        "section",
        { class: "feedback-entry", "data-study-id": study.id },
        el("h3", {}, study.id.slice(0, 8)),
        el("h4", {}, t("feedback.verdicts")),
        el("ul", {}, ...verdictItems),
        el("blockquote", { class: "feedback-text" }, review.feedback),
        el("small", {}, review.reviewed_at),
      ),
    );
  }
}
