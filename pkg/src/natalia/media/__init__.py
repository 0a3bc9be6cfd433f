"""Frame decoding and pixel-level similarity primitives."""

from .frames import (
    DimensionMismatch,
    FrameSequence,
    GrayFrame,
    MediaError,
    SimilarityScore,
    bt601_gray,
    resize_bilinear,
    resize_frame,
    resize_sequence,
)
from .similarity import DegenerateVariance, gaussian_window_1d, ncc, similarity, ssim
from .video import (
    CorruptStream,
    UnsupportedFormat,
    decode_video,
    frame_png_bytes,
    pack_frame_dir,
    write_frame_dir,
)

__all__ = [
    "CorruptStream",
    "DegenerateVariance",
    "DimensionMismatch",
    "FrameSequence",
    "GrayFrame",
    "MediaError",
    "SimilarityScore",
    "UnsupportedFormat",
    "bt601_gray",
    "decode_video",
    "frame_png_bytes",
    "gaussian_window_1d",
    "ncc",
    "pack_frame_dir",
    "resize_bilinear",
    "resize_frame",
    "resize_sequence",
    "similarity",
    "ssim",
    "write_frame_dir",
]
