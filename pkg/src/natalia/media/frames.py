"""Grayscale frame containers and pixel-level helpers.

Every stage of the pipeline (similarity, classification, key-frame selection,
dataset expansion) operates on 8-bit single-channel frames. Color input is
collapsed to luminance at decode time and never propagated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_DIM = 16  # smallest edge for which the 11x11 SSIM window is meaningful


class MediaError(Exception):
    """Base for media-layer failures."""


class DimensionMismatch(MediaError):
    """Two frames that must share a shape do not."""


@dataclass(frozen=True)
class GrayFrame:
    """A single decoded grayscale frame.

    pixels is a read-only uint8 array of shape (height, width); index is the
    0-based position in the source sequence.
    """

    index: int
    pixels: np.ndarray
    timestamp_ms: float | None = None

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.dtype != np.uint8 or px.ndim != 2:
            raise ValueError("pixels must be a 2-D uint8 array")
        if px.shape[0] < MIN_DIM or px.shape[1] < MIN_DIM:
            raise ValueError(
                f"frame must be at least {MIN_DIM}x{MIN_DIM}, got {px.shape[1]}x{px.shape[0]}"
            )
        px = px.copy() if px.base is not None or px.flags.writeable else px
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def size(self) -> tuple[int, int]:
        """(width, height)."""
        return self.width, self.height


@dataclass(frozen=True)
class FrameSequence:
    """An ordered, shape-homogeneous run of frames from one recording."""

    frames: tuple[GrayFrame, ...]
    source_id: str
    fps: float | None = None

    def __post_init__(self):
        frames = tuple(self.frames)
        for i, f in enumerate(frames):
            if f.index != i:
                raise ValueError(f"frame indices must be contiguous from 0; got {f.index} at position {i}")
        if frames:
            w, h = frames[0].size
            for f in frames:
                if f.size != (w, h):
                    raise ValueError("all frames in a sequence must share dimensions")
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, index: int) -> GrayFrame:
        return self.frames[index]

    @property
    def size(self) -> tuple[int, int]:
        if not self.frames:
            raise ValueError("empty sequence has no size")
        return self.frames[0].size


@dataclass(frozen=True)
class SimilarityScore:
    """Paired structural and correlation similarity between two frames."""

    ssim: float
    ncc: float

    SLACK = 1e-9

    def __post_init__(self):
        for name, v in (("ssim", self.ssim), ("ncc", self.ncc)):
            if not (-1.0 - self.SLACK <= v <= 1.0 + self.SLACK):
                raise ValueError(f"{name} out of range [-1, 1]: {v}")


def bt601_gray(rgb: np.ndarray) -> np.ndarray:
    """Collapse an (H, W, 3) RGB uint8 array to ITU-R BT.601 luminance.

    0.299 R + 0.587 G + 0.114 B, rounded to the nearest integer.
    """
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) array")
    y = (
        0.299 * rgb[..., 0].astype(np.float64)
        + 0.587 * rgb[..., 1].astype(np.float64)
        + 0.114 * rgb[..., 2].astype(np.float64)
    )
    return np.clip(np.rint(y), 0, 255).astype(np.uint8)


def resize_bilinear(pixels: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resize of a 2-D uint8 array using half-pixel source centers.

    Source coordinate for destination index j is (j + 0.5) * src/dst - 0.5,
    clamped to the image; the interpolated value is rounded half-to-even.
    Same-size calls return the input unchanged, so resize is exactly identity.
    """
    if pixels.ndim != 2:
        raise ValueError("expected a 2-D array")
    src_h, src_w = pixels.shape
    if (src_w, src_h) == (width, height):
        return pixels.copy()

    def axis_coords(dst: int, src: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pos = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
        pos = np.clip(pos, 0.0, src - 1.0)
        lo = np.floor(pos).astype(np.intp)
        hi = np.minimum(lo + 1, src - 1)
        return lo, hi, pos - lo

    x0, x1, tx = axis_coords(width, src_w)
    y0, y1, ty = axis_coords(height, src_h)
    img = pixels.astype(np.float64)
    top = img[np.ix_(y0, x0)] * (1.0 - tx) + img[np.ix_(y0, x1)] * tx
    bot = img[np.ix_(y1, x0)] * (1.0 - tx) + img[np.ix_(y1, x1)] * tx
    out = top * (1.0 - ty)[:, None] + bot * ty[:, None]
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def resize_frame(frame: GrayFrame, width: int, height: int) -> GrayFrame:
    if frame.size == (width, height):
        return frame
    return GrayFrame(
        index=frame.index,
        pixels=resize_bilinear(frame.pixels, width, height),
        timestamp_ms=frame.timestamp_ms,
    )


def resize_sequence(seq: FrameSequence, width: int, height: int) -> FrameSequence:
    if seq.frames and seq.size == (width, height):
        return seq
    return FrameSequence(
        frames=tuple(resize_frame(f, width, height) for f in seq.frames),
        source_id=seq.source_id,
        fps=seq.fps,
    )
