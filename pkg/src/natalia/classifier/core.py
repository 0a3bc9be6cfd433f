"""Fetal-plane classification over grayscale frames.

Backends are interchangeable behind a tiny contract: given a frame at the
backend's input size, produce a probability vector over the six labels.
Two backends ship here: a deterministic mock driven by pixel markers (see
MARKER notes below) and an ONNX model runner.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..media.frames import FrameSequence, GrayFrame


class ClassifierError(Exception):
    """Base for classifier failures."""


class ModelNotFound(ClassifierError):
    pass


class ShapeMismatch(ClassifierError):
    """Model output head is not 6-way, or the graph shape is unusable."""


class SizeMismatch(ClassifierError):
    """Frame dimensions do not match the backend input size."""


class PlaneLabel(Enum):
    """The six labels, in canonical order (used for all vectors and matrices)."""

    AC = 0
    BPD = 1
    HS = 2
    SS = 3
    FL = 4
    NO_PLANE = 5

    @classmethod
    def canonical(cls) -> tuple["PlaneLabel", ...]:
        return tuple(sorted(cls, key=lambda l: l.value))

    @classmethod
    def planes(cls) -> tuple["PlaneLabel", ...]:
        """The five anatomical plane labels (NO_PLANE excluded)."""
        return tuple(l for l in cls.canonical() if l is not cls.NO_PLANE)

    @classmethod
    def parse(cls, name: str) -> "PlaneLabel":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown plane label {name!r}") from None


N_LABELS = len(PlaneLabel)
PROB_TOL = 1e-6


@dataclass(frozen=True)
class Prediction:
    """Per-frame probability vector plus its argmax summary."""

    frame_index: int
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) != N_LABELS:
            raise ValueError(f"expected {N_LABELS} probabilities, got {len(self.probs)}")
        if any(p < -PROB_TOL or p > 1 + PROB_TOL for p in self.probs):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(sum(self.probs) - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities must sum to 1, got {sum(self.probs)!r}")

    @property
    def argmax(self) -> PlaneLabel:
        # ties resolve to the lowest canonical index
        best = max(range(N_LABELS), key=lambda i: (self.probs[i], -i))
        return PlaneLabel(best)

    @property
    def confidence(self) -> float:
        return max(self.probs)


# Mock marker protocol. The synthetic sweep generator stamps two 16x16 blocks
# into the top-left corner of a frame:
#   rows 0..15, cols  0..15  uniform intensity 40k + 20 encodes label index k
#   rows 0..15, cols 16..31  uniform intensity round(c * 255) encodes confidence
# The mock accepts a label block only if it is near-uniform and near a code;
# everything else classifies as NO_PLANE.
MARKER_BLOCK = 16
MARKER_LEVELS = tuple(40 * k + 20 for k in range(N_LABELS))
MARKER_LEVEL_TOL = 10.0
MARKER_STD_TOL = 2.0
NO_MARKER_PROBS = (0.02, 0.02, 0.02, 0.02, 0.02, 0.9)


def marker_probs(label: PlaneLabel, confidence: float) -> tuple[float, ...]:
    """The probability vector the mock emits for a marked frame."""
    rest = (1.0 - confidence) / (N_LABELS - 1)
    return tuple(confidence if i == label.value else rest for i in range(N_LABELS))


class MockBackend:
    """Deterministic backend that reads the generator's marker blocks.

    Lets the whole pipeline run end to end with no trained weights: the
    planted label and confidence round-trip through pixels.
    """

    def __init__(self, input_size: tuple[int, int] = (224, 224)):
        w, h = input_size
        if w < 2 * MARKER_BLOCK or h < MARKER_BLOCK:
            raise ValueError(f"mock input size must fit two {MARKER_BLOCK}x{MARKER_BLOCK} marker blocks")
        self.name = "mock"
        self.input_size = (w, h)

    def classify_batch(self, pixels: np.ndarray) -> np.ndarray:
        out = np.empty((pixels.shape[0], N_LABELS), dtype=np.float64)
        for i, px in enumerate(pixels):
            label_block = px[:MARKER_BLOCK, :MARKER_BLOCK].astype(np.float64)
            conf_block = px[:MARKER_BLOCK, MARKER_BLOCK : 2 * MARKER_BLOCK].astype(np.float64)
            mean = float(label_block.mean())
            k = int(round((mean - 20.0) / 40.0))
            if (
                0 <= k < N_LABELS
                and abs(mean - MARKER_LEVELS[k]) <= MARKER_LEVEL_TOL
                and float(label_block.std()) <= MARKER_STD_TOL
            ):
                out[i] = marker_probs(PlaneLabel(k), float(conf_block.mean()) / 255.0)
            else:
                out[i] = NO_MARKER_PROBS
        return out


_MOCK_SIZE = re.compile(r"^mock:(\d+)x(\d+)$")


def load_backend(descriptor: str):
    """Resolve a backend descriptor: `mock`, `mock:<W>x<H>`, or `model:<path>`.

    Model files are ONNX (opset >= 13) with a single NxCxHxW input and a
    single Nx6 logits output; this module applies the softmax.
    """
    if descriptor == "mock":
        return MockBackend()
    m = _MOCK_SIZE.match(descriptor)
    if m:
        return MockBackend(input_size=(int(m.group(1)), int(m.group(2))))
    if descriptor.startswith("model:"):
        from .onnx_backend import OnnxBackend

        return OnnxBackend(descriptor[len("model:") :])
    raise ModelNotFound(f"unknown backend descriptor {descriptor!r}")


def classify(backend, frame: GrayFrame) -> Prediction:
    """Classify one frame (already at the backend's input size)."""
    if frame.size != tuple(backend.input_size):
        raise SizeMismatch(
            f"frame {frame.index} is {frame.size}, backend {backend.name!r} expects {tuple(backend.input_size)}"
        )
    probs = backend.classify_batch(frame.pixels[np.newaxis, ...])[0]
    return Prediction(frame_index=frame.index, probs=tuple(float(p) for p in probs))


def classify_sequence(backend, seq: FrameSequence, batch: int = 16) -> list[Prediction]:
    """Classify every frame, preserving order; results do not depend on batch."""
    if batch < 1:
        raise ValueError("batch must be >= 1")
    preds: list[Prediction] = []
    frames = seq.frames
    for start in range(0, len(frames), batch):
        chunk = frames[start : start + batch]
        for f in chunk:
            if f.size != tuple(backend.input_size):
                raise SizeMismatch(
                    f"frame {f.index} is {f.size}, backend {backend.name!r} expects {tuple(backend.input_size)}"
                )
        stacked = np.stack([f.pixels for f in chunk])
        probs = backend.classify_batch(stacked)
        for f, row in zip(chunk, probs):
            preds.append(Prediction(frame_index=f.index, probs=tuple(float(p) for p in row)))
    return preds
