/**
 * Operator upload wizard: pick one of the four sweep trajectories (shown as
 * pictograms), attach the video, upload with a progress bar. Failures keep
 * the selected payload and surface a retry banner; a retry reuses the same
 * wizard state so a successful second attempt creates exactly one study.
 */

import { ApiClient, type UploadProgress } from "../api.js";
import { clear, el } from "../dom.js";
import { t } from "../i18n.js";
import type { Study, Trajectory } from "../types.js";
import { TRAJECTORIES } from "../types.js";

const PICTOGRAM_STROKES: Record<Trajectory, string> = {
  VERTICAL: "M16 4 L16 28",
  HORIZONTAL: "M4 16 L28 16",
  DIAGONAL_1: "M6 6 L26 26",
  DIAGONAL_2: "M26 6 L6 26",
};

function pictogram(trajectory: Trajectory): SVGSVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", "0 0 32 32");
  svg.setAttribute("class", "pictogram");
  svg.setAttribute("aria-hidden", "true");
  const belly = document.createElementNS("http://www.w3.org/2000/svg", "ellipse");
  belly.setAttribute("cx", "16");
  belly.setAttribute("cy", "16");
  belly.setAttribute("rx", "13");
  belly.setAttribute("ry", "11");
  belly.setAttribute("class", "pictogram-body");
  const stroke = document.createElementNS("http://www.w3.org/2000/svg", "path");
  stroke.setAttribute("d", PICTOGRAM_STROKES[trajectory]);
  stroke.setAttribute("class", "pictogram-sweep");
  stroke.setAttribute("marker-end", "none");
  svg.append(belly, stroke);
  return svg;
}

export interface UploadWizardHandles {
  root: HTMLElement;
  /** test hook: drive the wizard without synthetic input events */
  setVideo(video: File | Blob): void;
  setTrajectory(trajectory: Trajectory): void;
  submit(): Promise<void>;
}

export function uploadWizard(
  api: ApiClient,
  onUploaded: (study: Study) => void,
): UploadWizardHandles {
  let trajectory: Trajectory = "VERTICAL";
  let video: File | Blob | null = null;

  const progress = el("progress", { class: "upload-progress", max: "1", value: "0", hidden: "" });
  const notice = el("p", { class: "notice", hidden: "" });
  const retryButton = el("button", { class: "retry", type: "button", hidden: "" }, t("upload.retry"));
  const fileInput = el("input", { type: "file", accept: ".zip,.mp4", "data-testid": "video-input" });
  const startButton = el("button", { type: "submit" }, t("upload.start"));

  fileInput.addEventListener("change", () => {
    video = fileInput.files && fileInput.files.length ? fileInput.files[0] : null;
  });

  const trajectoryBoxes = TRAJECTORIES.map((value) => {
    const radio = el("input", { type: "radio", name: "trajectory", value });
    if (value === trajectory) {
      radio.checked = true;
    }
    radio.addEventListener("change", () => {
      trajectory = value;
    });
    return el(
      "label",
      { class: "trajectory-option", "data-trajectory": value },
      radio,
      pictogram(value),
      el("span", {}, t(`trajectory.${value}` as Parameters<typeof t>[0])),
    );
  });

  async function submit(): Promise<void> {
    if (!video) {
      return;
    }
    notice.hidden = true;
    retryButton.hidden = true;
    progress.hidden = false;
    progress.value = 0;
    startButton.disabled = true;
    try {
      const study = await api.uploadStudy(trajectory, video, (p: UploadProgress) => {
        progress.value = p.total ? p.loaded / p.total : 0;
      });
      progress.value = 1;
      notice.textContent = t("upload.done");
      notice.className = "notice notice-ok";
      notice.hidden = false;
      onUploaded(study);
    } catch {
      // keep video + trajectory so retry re-submits the same study once
      notice.textContent = t("upload.failed");
      notice.className = "notice notice-error";
      notice.hidden = false;
      retryButton.hidden = false;
    } finally {
      startButton.disabled = false;
      progress.hidden = true;
    }
  }

  retryButton.addEventListener("click", () => void submit());

  const form = el(
    "form",
    { class: "upload-wizard" },
    el("h2", {}, t("upload.title")),
    el("fieldset", {}, el("legend", {}, t("upload.trajectory")), ...trajectoryBoxes),
    el("label", {}, t("upload.chooseFile"), fileInput),
    startButton,
    progress,
    notice,
    retryButton,
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void submit();
  });

  return {
    root: form,
    setVideo(v) {
      video = v;
    },
    setTrajectory(value) {
      trajectory = value;
    },
    submit,
  };
}

export function noticeText(root: HTMLElement): string {
  const node = root.querySelector(".notice");
  return node && !(node as HTMLElement).hidden ? node.textContent ?? "" : "";
}

export function retryVisible(root: HTMLElement): boolean {
  const node = root.querySelector<HTMLButtonElement>(".retry");
  return node !== null && !node.hidden;
}

export { clear };
