"""Synthetic sweep fixtures with known ground truth.

Generated frames carry the mock backend's marker blocks, so the planted
label/confidence of every span round-trips through decode -> classify. The
speckled background is built so no accidental marker appears: its local
variance stays far above the mock's uniformity tolerance.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import MARKER_BLOCK, MARKER_LEVELS, PlaneLabel
from .media.frames import FrameSequence, GrayFrame
from .media.video import write_frame_dir

SIDECAR_NAME = "ground_truth.json"
SIDECAR_SCHEMA = "natalia-sweep-sim/1"

PEAK_CONFIDENCE = 0.95
EDGE_FALLOFF = 0.04
MIN_CONFIDENCE = 0.25  # keeps the planted label on top of the residual mass

_SPAN = re.compile(r"^([A-Za-z_]+)@(\d+)-(\d+)$")


@dataclass(frozen=True)
class PlantedSpan:
    label: PlaneLabel
    start: int
    end: int

    @property
    def peak_index(self) -> int:
        return (self.start + self.end) // 2

    def confidence_at(self, index: int) -> float:
        c = PEAK_CONFIDENCE - EDGE_FALLOFF * abs(index - self.peak_index)
        return max(MIN_CONFIDENCE, c)


def parse_spans(text: str) -> list[PlantedSpan]:
    """Parse `AC@10-14,FL@40-42` span syntax."""
    spans = []
    for chunk in text.split(","):
        m = _SPAN.match(chunk.strip())
        if not m:
            raise ValueError(f"bad span {chunk!r}; expected LABEL@start-end")
        label = PlaneLabel.parse(m.group(1))
        if label is PlaneLabel.NO_PLANE:
            raise ValueError("plant plane labels only; unmarked frames already read as NO_PLANE")
        start, end = int(m.group(2)), int(m.group(3))
        if start > end:
            raise ValueError(f"span {chunk!r} has start > end")
        spans.append(PlantedSpan(label, start, end))
    return spans


def _validate_spans(spans: list[PlantedSpan], frame_count: int) -> None:
    ordered = sorted(spans, key=lambda s: s.start)
    for s in ordered:
        if s.end >= frame_count:
            raise ValueError(f"span {s.label.name}@{s.start}-{s.end} exceeds {frame_count} frames")
    for a, b in zip(ordered, ordered[1:]):
        if b.start <= a.end:
            raise ValueError(
                f"overlapping spans: {a.label.name}@{a.start}-{a.end} and {b.label.name}@{b.start}-{b.end}"
            )


def _background(rng: np.random.Generator, width: int, height: int, phase: float) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width]
    base = 110 + 40 * np.sin(xx / 31.0 + phase) * np.cos(yy / 23.0 - phase / 2)
    speckle = rng.normal(0.0, 14.0, size=(height, width))
    return np.clip(np.rint(base + speckle), 0, 255).astype(np.uint8)


def stamp_marker(pixels: np.ndarray, label: PlaneLabel, confidence: float) -> None:
    """Write the two marker blocks for (label, confidence) into a frame."""
    if not MIN_CONFIDENCE <= confidence <= 1.0:
        raise ValueError(f"confidence {confidence} outside [{MIN_CONFIDENCE}, 1.0]")
    pixels[:MARKER_BLOCK, :MARKER_BLOCK] = MARKER_LEVELS[label.value]
    pixels[:MARKER_BLOCK, MARKER_BLOCK : 2 * MARKER_BLOCK] = int(round(confidence * 255))


def generate_sweep(frame_count: int, spans: list[PlantedSpan], *,
                   size: tuple[int, int] = (224, 224), fps: float = 10.0,
                   rng_seed: int = 7, source_id: str = "synthetic") -> tuple[FrameSequence, dict]:
    """Build an in-memory synthetic sweep plus its ground-truth sidecar dict."""
    if frame_count < 1:
        raise ValueError("frame_count must be >= 1")
    width, height = size
    if width < 2 * MARKER_BLOCK or height < MARKER_BLOCK:
        raise ValueError(f"frames must fit two {MARKER_BLOCK}x{MARKER_BLOCK} marker blocks")
    _validate_spans(spans, frame_count)

    rng = np.random.Generator(np.random.PCG64(rng_seed))
    by_frame = {}
    for span in spans:
        for i in range(span.start, span.end + 1):
            by_frame[i] = (span.label, span.confidence_at(i))

    frames = []
    for i in range(frame_count):
        px = _background(rng, width, height, phase=i * 0.21)
        if i in by_frame:
            label, confidence = by_frame[i]
            stamp_marker(px, label, confidence)
        frames.append(GrayFrame(index=i, pixels=px, timestamp_ms=i * 1000.0 / fps))

    sidecar = {
        "schema": SIDECAR_SCHEMA,
        "source_id": source_id,
        "frames": frame_count,
        "size": [width, height],
        "fps": fps,
        "rng_seed": rng_seed,
        "spans": [
            {
                "label": s.label.name,
                "start": s.start,
                "end": s.end,
                "peak_index": s.peak_index,
                "peak_confidence": round(s.confidence_at(s.peak_index) * 255) / 255,
                "confidences": [round(s.confidence_at(i) * 255) / 255
                                for i in range(s.start, s.end + 1)],
            }
            for s in sorted(spans, key=lambda s: s.start)
        ],
    }
    return FrameSequence(frames=tuple(frames), source_id=source_id, fps=fps), sidecar


def write_sweep_fixture(frame_count: int, spans: list[PlantedSpan], out_dir: str | Path, *,
                        size: tuple[int, int] = (224, 224), fps: float = 10.0,
                        rng_seed: int = 7) -> Path:
    """Emit a frame-directory fixture with its ground-truth sidecar."""
    out = Path(out_dir)
    seq, sidecar = generate_sweep(frame_count, spans, size=size, fps=fps,
                                  rng_seed=rng_seed, source_id=out.name)
    write_frame_dir(seq, out)
    (out / SIDECAR_NAME).write_text(json.dumps(sidecar, sort_keys=True, indent=2) + "\n",
                                    encoding="utf-8")
    return out
