from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from natalia.media import FrameSequence, GrayFrame


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def make_frame(pixels: np.ndarray, index: int = 0) -> GrayFrame:
    return GrayFrame(index=index, pixels=np.asarray(pixels, dtype=np.uint8))


def random_frame(rng, width: int = 32, height: int = 32, index: int = 0) -> GrayFrame:
    return make_frame(rng.integers(0, 256, (height, width), dtype=np.uint8), index)


def make_sequence(arrays, source_id: str = "seq", fps: float | None = None) -> FrameSequence:
    frames = tuple(make_frame(a, i) for i, a in enumerate(arrays))
    return FrameSequence(frames=frames, source_id=source_id, fps=fps)
