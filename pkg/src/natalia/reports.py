"""Report rendering: JSON, plain-text tables, CSV, and matplotlib figures.

Every eval path writes the same bundle shape into an output directory:
report.json + report.txt + report.csv + one or more PNG figures. Figures are
rendered byte-deterministically (Agg backend, fixed dpi, no wall-clock
metadata) so repeated runs produce identical files.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .classifier import PlaneLabel
from .keyframes import StudyResult
from .metrics import (
    ConfusionMatrix,
    MISMATCH,
    TLX_DIMENSIONS,
    accuracy,
    macro_f1,
    per_class,
    weighted_f1,
)

_FIG_DPI = 100


def _write_json(doc: dict, path: Path) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _save_fig(fig, path: Path) -> None:
    fig.savefig(path, dpi=_FIG_DPI, bbox_inches="tight")
    plt.close(fig)


# --- classification (confusion matrix) ---------------------------------------


def classification_report(cm: ConfusionMatrix) -> dict:
    return {
        "labels": [l.name for l in PlaneLabel.canonical()],
        "counts": cm.counts.tolist(),
        "total": cm.total,
        "accuracy": accuracy(cm),
        "macro_f1": macro_f1(cm),
        "weighted_f1": weighted_f1(cm),
        "per_class": per_class(cm),
    }


def render_confusion_text(cm: ConfusionMatrix) -> str:
    labels = [l.name for l in PlaneLabel.canonical()]
    width = max(8, max(len(l) for l in labels) + 1)
    out = io.StringIO()
    out.write("true \\ pred".ljust(12) + "".join(l.rjust(width) for l in labels) + "\n")
    for i, row_label in enumerate(labels):
        row = "".join(str(int(cm.counts[i, j])).rjust(width) for j in range(len(labels)))
        out.write(row_label.ljust(12) + row + "\n")
    out.write(f"\naccuracy     {accuracy(cm):.4f}\n")
    out.write(f"macro F1     {macro_f1(cm):.4f}\n")
    out.write(f"weighted F1  {weighted_f1(cm):.4f}\n")
    return out.getvalue()


def confusion_figure(cm: ConfusionMatrix):
    labels = [l.name for l in PlaneLabel.canonical()]
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(cm.counts, cmap="Blues")
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right")
    ax.set_yticks(range(len(labels)), labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = cm.counts.max() / 2 if cm.total else 0
    for i in range(len(labels)):
        for j in range(len(labels)):
            v = int(cm.counts[i, j])
            ax.text(j, i, str(v), ha="center", va="center",
                    color="white" if v > threshold else "black", fontsize=8)
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    return fig


def write_classification_bundle(cm: ConfusionMatrix, out_dir: str | Path) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = classification_report(cm)
    _write_json(report, out / "report.json")
    (out / "report.txt").write_text(render_confusion_text(cm), encoding="utf-8")
    with (out / "report.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "precision", "recall", "f1", "support"])
        for name, row in report["per_class"].items():
            writer.writerow([name, f"{row['precision']:.6f}", f"{row['recall']:.6f}",
                             f"{row['f1']:.6f}", row["support"]])
    _save_fig(confusion_figure(cm), out / "confusion_matrix.png")
    return report


# --- agreement -----------------------------------------------------------------


def render_agreement_text(report: dict) -> str:
    """Side-by-side per-study plane counts, system columns then specialist."""
    labels = report["labels"]
    col = 5
    out = io.StringIO()
    half = col * len(labels)
    out.write("study".ljust(10) + "| " + "system".center(half) + " || " + "specialist".center(half) + "\n")
    header = "".join(l.rjust(col) for l in labels)
    out.write(" ".ljust(10) + "| " + header + " || " + header + "\n")
    out.write("-" * (14 + 2 * half + 4) + "\n")
    for row in report["rows"]:
        sys_cells = "".join(str(row["labels"][l]["system"]).rjust(col) for l in labels)
        spec_cells = "".join(str(row["labels"][l]["specialist"]).rjust(col) for l in labels)
        out.write(row["study_id"].ljust(10) + "| " + sys_cells + " || " + spec_cells + "\n")
    out.write("\ndeltas (system - specialist), * marks presence mismatch\n")
    for row in report["rows"]:
        cells = []
        for l in labels:
            cell = row["labels"][l]
            mark = "*" if cell["status"] == MISMATCH else ""
            cells.append(f"{cell['delta']:+d}{mark}".rjust(col + 1))
        out.write(row["study_id"].ljust(10) + "|" + "".join(cells) + "\n")
    rate = report["presence_agreement_rate"]
    if rate is not None:
        out.write(f"\npresence agreement: {rate:.4f} "
                  f"({report['scored_cells'] - report['mismatches']}/{report['scored_cells']})\n")
    return out.getvalue()


def agreement_figure(report: dict):
    labels = report["labels"]
    studies = [row["study_id"] for row in report["rows"]]
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(studies)), 4))
    x = np.arange(len(studies))
    width = 0.8 / max(1, len(labels))
    for k, label in enumerate(labels):
        deltas = [row["labels"][label]["delta"] for row in report["rows"]]
        ax.bar(x + (k - (len(labels) - 1) / 2) * width, deltas, width, label=label)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xticks(x, studies, rotation=45, ha="right")
    ax.set_ylabel("count delta (system - specialist)")
    ax.legend(ncols=len(labels), fontsize=8)
    fig.tight_layout()
    return fig


def write_agreement_bundle(report: dict, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(report, out / "report.json")
    (out / "report.txt").write_text(render_agreement_text(report), encoding="utf-8")
    labels = report["labels"]
    with (out / "report.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["study_id", "label", "system", "specialist", "delta", "status"])
        for row in report["rows"]:
            for l in labels:
                cell = row["labels"][l]
                writer.writerow([row["study_id"], l, cell["system"], cell["specialist"],
                                 cell["delta"], cell["status"]])
    if report["rows"]:
        _save_fig(agreement_figure(report), out / "agreement_deltas.png")


# --- TLX -------------------------------------------------------------------------


def render_tlx_text(summary: dict) -> str:
    out = io.StringIO()
    out.write(f"NASA-TLX summary over {summary['n']} response(s)\n\n")
    for dim in TLX_DIMENSIONS:
        stats = summary["dimensions"][dim]
        sd = f"{stats['sd']:.2f}" if stats["sd"] is not None else "n/a"
        out.write(f"{dim.ljust(12)} M = {stats['mean']:.2f}, SD = {sd}\n")
    raw = summary["raw_tlx"]
    sd = f"{raw['sd']:.2f}" if raw["sd"] is not None else "n/a"
    out.write(f"\n{'raw TLX'.ljust(12)} M = {raw['mean']:.2f}, SD = {sd}\n")
    return out.getvalue()


def tlx_figure(summary: dict):
    means = [summary["dimensions"][d]["mean"] for d in TLX_DIMENSIONS]
    sds = [summary["dimensions"][d]["sd"] or 0.0 for d in TLX_DIMENSIONS]
    fig, ax = plt.subplots(figsize=(7, 4))
    x = np.arange(len(TLX_DIMENSIONS))
    ax.bar(x, means, yerr=sds, capsize=4, color="#4878a8")
    ax.set_xticks(x, TLX_DIMENSIONS, rotation=30, ha="right")
    ax.set_ylabel("score")
    ax.set_ylim(0, 100)
    fig.tight_layout()
    return fig


def write_tlx_bundle(summary: dict, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(summary, out / "report.json")
    (out / "report.txt").write_text(render_tlx_text(summary), encoding="utf-8")
    with (out / "report.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dimension", "mean", "sd"])
        for dim in TLX_DIMENSIONS:
            stats = summary["dimensions"][dim]
            writer.writerow([dim, f"{stats['mean']:.6f}",
                             "" if stats["sd"] is None else f"{stats['sd']:.6f}"])
        raw = summary["raw_tlx"]
        writer.writerow(["raw_tlx", f"{raw['mean']:.6f}",
                         "" if raw["sd"] is None else f"{raw['sd']:.6f}"])
    _save_fig(tlx_figure(summary), out / "tlx_scores.png")


# --- study timeline ---------------------------------------------------------------


def timeline_figure(result: StudyResult):
    """Per-frame confidence by plane label with selected key frames marked."""
    fig, ax = plt.subplots(figsize=(8, 4))
    frames = [p.frame_index for p in result.predictions]
    for label in PlaneLabel.planes():
        conf = [p.probs[label.value] for p in result.predictions]
        ax.plot(frames, conf, label=label.name, linewidth=1.0)
    for kf in result.keyframes:
        ax.axvline(kf.frame_index, color="gray", linewidth=0.6, linestyle=":")
        ax.plot([kf.frame_index], [kf.confidence], marker="o", color="black", markersize=4)
    ax.axhline(result.config.min_confidence, color="red", linewidth=0.6, linestyle="--")
    ax.set_xlabel("frame")
    ax.set_ylabel("confidence")
    ax.set_ylim(0, 1.05)
    ax.legend(ncols=5, fontsize=8)
    fig.tight_layout()
    return fig


def write_timeline_figure(result: StudyResult, path: str | Path) -> None:
    _save_fig(timeline_figure(result), Path(path))
