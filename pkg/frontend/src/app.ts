/**
 * Hash-routed single-page shell. Navigation is built from the session role,
 * and direct navigation to a route outside the role renders a blocked notice
 * instead of the view.
 */

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { t } from "./i18n.js";
import { StudyListPoller } from "./poll.js";
import { allowedRoutes, canAccess, type Route, type SessionContext } from "./session.js";
import type { Study } from "./types.js";
import { feedbackView } from "./views/feedback.js";
import { reviewScreen } from "./views/review.js";
import { statusBadge, studyList } from "./views/studies.js";
import { uploadWizard } from "./views/upload.js";

const ROUTE_LABEL: Record<Exclude<Route, "review-detail">, Parameters<typeof t>[0]> = {
  upload: "nav.upload",
  studies: "nav.studies",
  feedback: "nav.feedback",
  review: "nav.review",
};

export interface App {
  render(hash: string): Promise<void>;
  stop(): void;
}

export function parseRoute(hash: string): { route: Route; studyId?: string } {
  const parts = hash.replace(/^#\/?/, "").split("/").filter(Boolean);
  if (parts[0] === "review" && parts[1]) {
    return { route: "review-detail", studyId: parts[1] };
  }
  const route = (parts[0] || "studies") as Route;
  return ["upload", "studies", "feedback", "review"].includes(route)
    ? { route }
    : { route: "studies" };
}

export function createApp(
  root: HTMLElement,
  api: ApiClient,
  session: SessionContext,
): App {
  const nav = el("nav", {}, ...allowedRoutes(session.role)
    .filter((route): route is Exclude<Route, "review-detail"> => route !== "review-detail")
    .map((route) => el("a", { href: `#/${route}`, "data-route": route }, t(ROUTE_LABEL[route]))));
  const main = el("main", {});
  root.append(el("header", {}, el("strong", {}, session.displayName), nav), main);

  let poller: StudyListPoller | null = null;

  function stopPolling(): void {
    poller?.stop();
    poller = null;
  }

  async function render(hash: string): Promise<void> {
    const { route, studyId } = parseRoute(hash);
    stopPolling();
    clear(main);
    if (!canAccess(route, session.role)) {
      main.append(el("p", { class: "blocked" }, t("role.blocked")));
      return;
    }
    if (route === "upload") {
      const listContainer = el("section", { class: "recent" });
      // a fresh upload refreshes the list immediately; the poller keeps going
      const wizard = uploadWizard(api, () => void poller?.tick());
      main.append(wizard.root, listContainer);
      poller = new StudyListPoller(api, (studies) => studyList(listContainer, studies));
      poller.start();
    } else if (route === "studies") {
      const container = el("section", {});
      main.append(container);
      poller = new StudyListPoller(api, (studies) => studyList(container, studies));
      poller.start();
    } else if (route === "feedback") {
      const container = el("section", {});
      main.append(container);
      feedbackView(container, await api.listStudies({ status: "REVIEWED" }));
    } else if (route === "review") {
      const pending = await api.listStudies({ pendingReview: true });
      const container = el("section", {});
      if (!pending.length) {
        container.append(el("p", { class: "empty-state" }, t("review.pendingEmpty")));
      } else {
        container.append(
          el(
            "ul",
            { class: "pending-list" },
            ...pending.map((study: Study) =>
              el(
                "li",
                { "data-study-id": study.id },
                el("a", { href: `#/review/${study.id}` }, study.id.slice(0, 8)),
                statusBadge(study.status),
              ),
            ),
          ),
        );
      }
      main.append(container);
    } else if (route === "review-detail" && studyId) {
      const study = await api.getStudy(studyId);
      const screen = reviewScreen(api, study, () => {
        window.location.hash = "#/review";
      });
      main.append(screen.root);
    }
  }

  return { render, stop: stopPolling };
}

export function bootstrap(api: ApiClient, session: SessionContext): App {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app mount point");
  }
  const app = createApp(root, api, session);
  const rerender = () => void app.render(window.location.hash);
  window.addEventListener("hashchange", rerender);
  rerender();
  return app;
}
