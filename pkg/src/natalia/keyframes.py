"""Key-frame selection from a per-frame prediction stream.

Predictions are grouped into temporal runs per plane label, each run
contributes its peak-confidence frame as a candidate, and near-duplicate
candidates of the same label are dropped by SSIM before a per-label cap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .classifier import PlaneLabel, Prediction, classify_sequence
from .media.frames import FrameSequence, resize_sequence
from .media.similarity import ssim

STUDY_RESULT_SCHEMA = "natalia-study-result/1"


class IndexOutOfRange(Exception):
    """A run references a frame index the sequence does not contain."""


@dataclass(frozen=True)
class SelectionConfig:
    """Tunables for run grouping and key-frame selection."""

    min_confidence: float = 0.5
    max_gap: int = 2
    max_per_label: int = 12
    dedup_ssim: float = 0.90

    def __post_init__(self):
        if not 0.0 < self.min_confidence < 1.0:
            raise ValueError("min_confidence must lie in (0, 1)")
        if self.max_gap < 0:
            raise ValueError("max_gap must be >= 0")
        if self.max_per_label < 1:
            raise ValueError("max_per_label must be >= 1")
        if not 0.0 < self.dedup_ssim <= 1.0:
            raise ValueError("dedup_ssim must lie in (0, 1]")


@dataclass(frozen=True)
class Run:
    """A maximal stretch of frames detected as one plane.

    start/end are inclusive frame indices; interior gap frames bridged by the
    grouping rule lie within the span but never supply the peak.
    """

    label: PlaneLabel
    start: int
    end: int
    peak_index: int
    peak_confidence: float

    def __post_init__(self):
        if self.label is PlaneLabel.NO_PLANE:
            raise ValueError("runs cover plane labels only")
        if not self.start <= self.peak_index <= self.end:
            raise ValueError("peak must lie within the run span")


@dataclass(frozen=True)
class KeyFrame:
    """A selected diagnostic frame."""

    frame_index: int
    label: PlaneLabel
    confidence: float
    run: Run


def group_runs(preds: list[Prediction], cfg: SelectionConfig) -> list[Run]:
    """Group predictions into per-label runs.

    A frame belongs to label L when its argmax is L (not NO_PLANE) and its
    confidence clears min_confidence. Within one label, consecutive detected
    frames separated by at most max_gap other frames (any label, any
    confidence) fuse into a single run; the bridged frames widen the span but
    do not compete for the peak. Ties for the peak go to the earliest frame.
    """
    by_label: dict[PlaneLabel, list[Prediction]] = {}
    for p in preds:
        label = p.argmax
        if label is PlaneLabel.NO_PLANE or p.confidence < cfg.min_confidence:
            continue
        by_label.setdefault(label, []).append(p)

    runs: list[Run] = []
    for label, hits in by_label.items():
        group: list[Prediction] = []
        for p in hits:
            if group and p.frame_index - group[-1].frame_index - 1 > cfg.max_gap:
                runs.append(_close_run(label, group))
                group = []
            group.append(p)
        if group:
            runs.append(_close_run(label, group))
    runs.sort(key=lambda r: (r.start, r.label.value))
    return runs


def _close_run(label: PlaneLabel, group: list[Prediction]) -> Run:
    peak = max(group, key=lambda p: (p.confidence, -p.frame_index))
    return Run(
        label=label,
        start=group[0].frame_index,
        end=group[-1].frame_index,
        peak_index=peak.frame_index,
        peak_confidence=peak.confidence,
    )


def select_keyframes(runs: list[Run], frames: FrameSequence, cfg: SelectionConfig) -> list[KeyFrame]:
    """Pick key frames: one peak per run, SSIM de-dup and cap per label.

    De-duplication compares frames at whatever resolution `frames` carries;
    process_sweep passes the classifier-input-resolution sequence.
    """
    for run in runs:
        if not (0 <= run.start and run.end < len(frames)):
            raise IndexOutOfRange(f"run {run.start}..{run.end} outside sequence of {len(frames)} frames")

    kept: list[KeyFrame] = []
    by_label: dict[PlaneLabel, list[Run]] = {}
    for run in runs:
        by_label.setdefault(run.label, []).append(run)
    for label, label_runs in by_label.items():
        candidates = sorted(label_runs, key=lambda r: (-r.peak_confidence, r.peak_index))
        chosen: list[KeyFrame] = []
        for run in candidates:
            if len(chosen) >= cfg.max_per_label:
                break
            frame = frames[run.peak_index]
            if any(ssim(frame, frames[kf.frame_index]) > cfg.dedup_ssim for kf in chosen):
                continue
            chosen.append(KeyFrame(run.peak_index, label, run.peak_confidence, run))
        kept.extend(chosen)
    kept.sort(key=lambda kf: kf.frame_index)
    return kept


@dataclass(frozen=True)
class StudyResult:
    """Everything the pipeline produced for one sweep."""

    source_id: str
    frame_count: int
    backend_name: str
    config: SelectionConfig
    predictions: tuple[Prediction, ...]
    keyframes: tuple[KeyFrame, ...]
    label_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": STUDY_RESULT_SCHEMA,
            "source_id": self.source_id,
            "frame_count": self.frame_count,
            "backend": self.backend_name,
            "config": {
                "min_confidence": self.config.min_confidence,
                "max_gap": self.config.max_gap,
                "max_per_label": self.config.max_per_label,
                "dedup_ssim": self.config.dedup_ssim,
            },
            "label_counts": dict(self.label_counts),
            "keyframes": [
                {
                    "frame_index": kf.frame_index,
                    "label": kf.label.name,
                    "confidence": kf.confidence,
                    "run": {
                        "start": kf.run.start,
                        "end": kf.run.end,
                        "peak_index": kf.run.peak_index,
                        "peak_confidence": kf.run.peak_confidence,
                    },
                }
                for kf in self.keyframes
            ],
            "predictions": [
                {"frame_index": p.frame_index, "probs": list(p.probs)} for p in self.predictions
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "StudyResult":
        if doc.get("schema") != STUDY_RESULT_SCHEMA:
            raise ValueError(f"unexpected result schema {doc.get('schema')!r}")
        cfg = SelectionConfig(**doc["config"])
        preds = tuple(
            Prediction(frame_index=p["frame_index"], probs=tuple(p["probs"]))
            for p in doc["predictions"]
        )
        kfs = []
        for k in doc["keyframes"]:
            run = Run(
                label=PlaneLabel.parse(k["label"]),
                start=k["run"]["start"],
                end=k["run"]["end"],
                peak_index=k["run"]["peak_index"],
                peak_confidence=k["run"]["peak_confidence"],
            )
            kfs.append(KeyFrame(k["frame_index"], run.label, k["confidence"], run))
        return cls(
            source_id=doc["source_id"],
            frame_count=doc["frame_count"],
            backend_name=doc["backend"],
            config=cfg,
            predictions=preds,
            keyframes=tuple(kfs),
            label_counts=dict(doc["label_counts"]),
        )


def count_by_label(keyframes: list[KeyFrame]) -> dict[str, int]:
    """Per-plane key-frame tallies (all five planes, zeros included)."""
    counts = {label.name: 0 for label in PlaneLabel.planes()}
    for kf in keyframes:
        counts[kf.label.name] += 1
    return counts


def process_sweep(video: FrameSequence, backend, cfg: SelectionConfig | None = None,
                  batch: int = 16) -> StudyResult:
    """Classify a sweep and reduce it to key frames with per-label counts."""
    if len(video) == 0:
        raise ValueError("cannot process an empty sweep")
    cfg = cfg or SelectionConfig()
    w, h = backend.input_size
    resized = resize_sequence(video, w, h)
    preds = classify_sequence(backend, resized, batch=batch)
    runs = group_runs(preds, cfg)
    keyframes = select_keyframes(runs, resized, cfg)
    return StudyResult(
        source_id=video.source_id,
        frame_count=len(video),
        backend_name=backend.name,
        config=cfg,
        predictions=tuple(preds),
        keyframes=tuple(keyframes),
        label_counts=count_by_label(keyframes),
    )
