"""Sweep video decoding.

Supported containers:
  - MP4 (decoded through OpenCV/ffmpeg; H.264 baseline and anything else the
    local ffmpeg can read),
  - a frame directory: frame_00000.png, frame_00001.png, ... (8-bit grayscale
    or RGB) plus an optional meta.json carrying {"fps": <float>},
  - a .zip of a frame directory, which is the single-blob transport of the
    same container used for uploads.

The frame directory is the canonical lossless fixture format.
"""

from __future__ import annotations

import io
import json
import re
import tempfile
import zipfile
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .frames import FrameSequence, GrayFrame, MediaError, bt601_gray, resize_bilinear

FRAME_NAME = re.compile(r"frame_(\d{5})\.png$")
META_NAME = "meta.json"
_ZIP_MAGIC = b"PK\x03\x04"


class UnsupportedFormat(MediaError):
    """The source is not one of the supported containers or pixel formats."""


class CorruptStream(MediaError):
    """The source looked like a supported container but did not decode fully."""


def _gray_from_image(img: Image.Image, origin: str) -> np.ndarray:
    if img.mode == "L":
        return np.asarray(img, dtype=np.uint8)
    if img.mode == "RGB":
        return bt601_gray(np.asarray(img, dtype=np.uint8))
    raise UnsupportedFormat(f"{origin}: unsupported pixel mode {img.mode!r} (need 8-bit gray or RGB)")


def _read_frame_files(named_files: list[tuple[str, bytes]], source_id: str, fps: float | None,
                      target: tuple[int, int] | None) -> FrameSequence:
    """Decode (name, png bytes) pairs into a sequence; names must be contiguous."""
    indexed = []
    for name, blob in named_files:
        m = FRAME_NAME.search(name)
        if m:
            indexed.append((int(m.group(1)), name, blob))
    if not indexed:
        raise CorruptStream(f"{source_id}: no frame_NNNNN.png entries found")
    indexed.sort()
    frames = []
    for pos, (idx, name, blob) in enumerate(indexed):
        if idx != pos:
            raise CorruptStream(f"{source_id}: frame indices not contiguous (expected {pos}, found {idx})")
        try:
            with Image.open(io.BytesIO(blob)) as img:
                img.load()
                px = _gray_from_image(img, name)
        except UnidentifiedImageError as exc:
            raise CorruptStream(f"{source_id}: {name} is not a readable PNG") from exc
        if target is not None:
            px = resize_bilinear(px, target[0], target[1])
        ts = pos * 1000.0 / fps if fps else None
        frames.append(GrayFrame(index=pos, pixels=px, timestamp_ms=ts))
    _check_homogeneous(frames, source_id)
    return FrameSequence(frames=tuple(frames), source_id=source_id, fps=fps)


def _check_homogeneous(frames: list[GrayFrame], source_id: str) -> None:
    sizes = {f.size for f in frames}
    if len(sizes) > 1:
        raise CorruptStream(f"{source_id}: frames have mixed dimensions {sorted(sizes)}")


def _parse_meta(blob: bytes | None) -> float | None:
    if blob is None:
        return None
    try:
        meta = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptStream(f"{META_NAME} is not valid JSON") from exc
    fps = meta.get("fps")
    if fps is None:
        return None
    if not isinstance(fps, (int, float)) or fps <= 0:
        raise CorruptStream(f"{META_NAME}: fps must be a positive number")
    return float(fps)


def _decode_frame_dir(path: Path, target: tuple[int, int] | None) -> FrameSequence:
    files = [(p.name, p.read_bytes()) for p in sorted(path.iterdir()) if FRAME_NAME.search(p.name)]
    meta = path / META_NAME
    fps = _parse_meta(meta.read_bytes() if meta.exists() else None)
    if not files:
        raise CorruptStream(f"{path}: directory contains no frames")
    return _read_frame_files(files, source_id=path.name, fps=fps, target=target)


def _decode_zip(blob: bytes, source_id: str, target: tuple[int, int] | None) -> FrameSequence:
    try:
        zf = zipfile.ZipFile(io.BytesIO(blob))
    except zipfile.BadZipFile as exc:
        raise CorruptStream(f"{source_id}: not a readable zip archive") from exc
    with zf:
        files = []
        meta_blob = None
        for info in zf.infolist():
            base = info.filename.rsplit("/", 1)[-1]
            if FRAME_NAME.search(base):
                files.append((base, zf.read(info)))
            elif base == META_NAME:
                meta_blob = zf.read(info)
        fps = _parse_meta(meta_blob)
        return _read_frame_files(files, source_id=source_id, fps=fps, target=target)


def _decode_mp4(path: Path, target: tuple[int, int] | None) -> FrameSequence:
    import cv2

    cap = cv2.VideoCapture(str(path))
    if not cap.isOpened():
        raise CorruptStream(f"{path}: video container failed to open")
    try:
        fps = cap.get(cv2.CAP_PROP_FPS) or None
        if fps is not None and fps <= 0:
            fps = None
        frames = []
        while True:
            ok, bgr = cap.read()
            if not ok:
                break
            if bgr.ndim == 3:
                px = bt601_gray(bgr[..., ::-1])  # BGR -> RGB
            else:
                px = bgr.astype(np.uint8)
            if target is not None:
                px = resize_bilinear(px, target[0], target[1])
            idx = len(frames)
            ts = idx * 1000.0 / fps if fps else None
            frames.append(GrayFrame(index=idx, pixels=px, timestamp_ms=ts))
    finally:
        cap.release()
    if not frames:
        raise CorruptStream(f"{path}: no frames decoded")
    _check_homogeneous(frames, str(path))
    return FrameSequence(frames=tuple(frames), source_id=path.stem, fps=fps)


def decode_video(source: str | Path | bytes, target: tuple[int, int] | None = None,
                 source_id: str | None = None) -> FrameSequence:
    """Decode a sweep into a grayscale FrameSequence.

    source may be a frame directory, an .mp4 or .zip path, or raw bytes (zip
    or MP4, sniffed by magic). target, when given, is a (width, height) to
    bilinear-resize every frame to.
    """
    if isinstance(source, bytes):
        if source[:4] == _ZIP_MAGIC:
            return _decode_zip(source, source_id or "upload", target)
        if len(source) > 12 and source[4:8] == b"ftyp":
            with tempfile.NamedTemporaryFile(suffix=".mp4") as tmp:
                tmp.write(source)
                tmp.flush()
                seq = _decode_mp4(Path(tmp.name), target)
            return FrameSequence(frames=seq.frames, source_id=source_id or "upload", fps=seq.fps)
        raise UnsupportedFormat("byte payload is neither a zip archive nor an MP4")

    path = Path(source)
    if path.is_dir():
        return _decode_frame_dir(path, target)
    if not path.exists():
        raise CorruptStream(f"{path}: no such file or directory")
    if path.suffix.lower() == ".zip":
        return _decode_zip(path.read_bytes(), source_id or path.stem, target)
    if path.suffix.lower() in (".mp4", ".m4v", ".mov"):
        return _decode_mp4(path, target)
    raise UnsupportedFormat(f"{path}: unsupported container (need a frame directory, .zip, or .mp4)")


def write_frame_dir(seq: FrameSequence, out_dir: str | Path) -> Path:
    """Write a sequence as a canonical frame directory (with meta.json fps)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for frame in seq.frames:
        Image.fromarray(frame.pixels, mode="L").save(out / f"frame_{frame.index:05d}.png")
    if seq.fps:
        (out / META_NAME).write_text(json.dumps({"fps": seq.fps}), encoding="utf-8")
    return out


def frame_png_bytes(frame: GrayFrame) -> bytes:
    """Encode one frame as an 8-bit grayscale PNG."""
    buf = io.BytesIO()
    Image.fromarray(frame.pixels, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def pack_frame_dir(path: str | Path) -> bytes:
    """Zip a frame directory into the single-blob upload transport.

    Entries carry a fixed timestamp so packing is byte-reproducible.
    """
    path = Path(path)
    names = sorted(p.name for p in path.iterdir() if FRAME_NAME.search(p.name) or p.name == META_NAME)
    if not names:
        raise CorruptStream(f"{path}: directory contains no frames")
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name in names:
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, (path / name).read_bytes())
    return buf.getvalue()
