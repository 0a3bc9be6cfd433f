/** Operator study list with live status badges (fed by the 5 s poller). */

import { clear, el } from "../dom.js";
import { t } from "../i18n.js";
import type { Study, StudyStatus } from "../types.js";

export function statusBadge(status: StudyStatus): HTMLElement {
  return el(
    "span",
    { class: `badge badge-${status.toLowerCase()}`, "data-status": status },
    t(`studies.status.${status}` as Parameters<typeof t>[0]),
  );
}

export function studyList(container: HTMLElement, studies: Study[]): void {
  clear(container);
  container.append(el("h2", {}, t("studies.title")));
  if (!studies.length) {
    container.append(el("p", { class: "empty-state" }, t("studies.empty")));
    return;
  }
  const rows = studies.map((study) =>
    el(
      "li",
      { class: "study-row", "data-study-id": study.id },
      el("span", { class: "study-id" }, study.id.slice(0, 8)),
      el("span", { class: "study-trajectory" },
        t(`trajectory.${study.trajectory}` as Parameters<typeof t>[0])),
      statusBadge(study.status),
    ),
  );
  container.append(el("ul", { class: "study-list" }, ...rows));
}
