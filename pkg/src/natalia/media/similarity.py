"""Frame similarity measures: windowed SSIM and zero-lag NCC.

Both are used with the same > 0.90 inclusion threshold by dataset expansion,
and SSIM also drives key-frame de-duplication.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .frames import DimensionMismatch, GrayFrame, SimilarityScore

# Mean-SSIM constants (dynamic range 255, K1=0.01, K2=0.03)
WINDOW = 11
SIGMA = 1.5
C1 = (0.01 * 255.0) ** 2
C2 = (0.03 * 255.0) ** 2


class DegenerateVariance(Exception):
    """NCC is undefined when a frame has zero variance."""


def gaussian_window_1d(size: int = WINDOW, sigma: float = SIGMA) -> np.ndarray:
    """Normalized 1-D Gaussian tap weights on the integer grid centered at 0."""
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


_G1 = gaussian_window_1d()


def _windowed_mean(img: np.ndarray) -> np.ndarray:
    """Gaussian-weighted local mean over all fully interior 11x11 windows.

    Separable valid-mode filtering: rows first, then columns.
    """
    rows = sliding_window_view(img, WINDOW, axis=1) @ _G1
    return (sliding_window_view(rows, WINDOW, axis=0) @ _G1).astype(np.float64)


def ssim(a: GrayFrame, b: GrayFrame) -> float:
    """Mean structural similarity with an 11x11 Gaussian window (sigma 1.5).

    Local statistics are Gaussian-weighted; the map covers every fully interior
    window position and the result is its plain mean. Symmetric in (a, b).
    """
    if a.size != b.size:
        raise DimensionMismatch(f"frames differ in size: {a.size} vs {b.size}")
    x = a.pixels.astype(np.float64)
    y = b.pixels.astype(np.float64)
    mu_x = _windowed_mean(x)
    mu_y = _windowed_mean(y)
    var_x = _windowed_mean(x * x) - mu_x * mu_x
    var_y = _windowed_mean(y * y) - mu_y * mu_y
    cov = _windowed_mean(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + C1) * (2.0 * cov + C2)
    den = (mu_x * mu_x + mu_y * mu_y + C1) * (var_x + var_y + C2)
    return float(np.mean(num / den))


def ncc(a: GrayFrame, b: GrayFrame) -> float:
    """Zero-lag Pearson normalized cross-correlation of two frames.

    Both frames are mean-centered; the result is the cross-product sum divided
    by the product of the centered L2 norms. Pixel-identical constant frames
    correlate at 1.0; any other constant frame raises DegenerateVariance.
    """
    if a.size != b.size:
        raise DimensionMismatch(f"frames differ in size: {a.size} vs {b.size}")
    x = a.pixels.astype(np.float64).ravel()
    y = b.pixels.astype(np.float64).ravel()
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(dx @ dx)
    sy = float(dy @ dy)
    if sx == 0.0 or sy == 0.0:
        if sx == 0.0 and sy == 0.0 and np.array_equal(a.pixels, b.pixels):
            return 1.0
        raise DegenerateVariance("constant frame has no variance to correlate")
    return float(np.clip((dx @ dy) / np.sqrt(sx * sy), -1.0, 1.0))


def similarity(a: GrayFrame, b: GrayFrame) -> SimilarityScore:
    """Both similarity components in one call (shared precondition check)."""
    return SimilarityScore(ssim=ssim(a, b), ncc=ncc(a, b))
