"""Independent naive oracles for the main algorithms.

These deliberately re-derive results from first principles (explicit window
loops, per-seed walks, dict tallies) and never share code with the package
paths they check.
"""

from __future__ import annotations

import math

import numpy as np

WINDOW = 11
SIGMA = 1.5
C1 = (0.01 * 255.0) ** 2
C2 = (0.03 * 255.0) ** 2


def oracle_gaussian_kernel(size: int = WINDOW, sigma: float = SIGMA) -> np.ndarray:
    """Full 2-D kernel built directly from exp(-(x^2+y^2)/2s^2), normalized."""
    half = (size - 1) // 2
    kernel = np.empty((size, size), dtype=np.float64)
    for r in range(size):
        for c in range(size):
            dy, dx = r - half, c - half
            kernel[r, c] = math.exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def oracle_ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean SSIM via an explicit loop over every interior window position."""
    kernel = oracle_gaussian_kernel()
    h, w = a.shape
    x = a.astype(np.float64)
    y = b.astype(np.float64)
    values = []
    for top in range(h - WINDOW + 1):
        for left in range(w - WINDOW + 1):
            wx = x[top : top + WINDOW, left : left + WINDOW]
            wy = y[top : top + WINDOW, left : left + WINDOW]
            mu_x = float((kernel * wx).sum())
            mu_y = float((kernel * wy).sum())
            var_x = float((kernel * wx * wx).sum()) - mu_x * mu_x
            var_y = float((kernel * wy * wy).sum()) - mu_y * mu_y
            cov = float((kernel * wx * wy).sum()) - mu_x * mu_y
            num = (2 * mu_x * mu_y + C1) * (2 * cov + C2)
            den = (mu_x * mu_x + mu_y * mu_y + C1) * (var_x + var_y + C2)
            values.append(num / den)
    return sum(values) / len(values)


def oracle_ncc(a: np.ndarray, b: np.ndarray) -> float:
    """Zero-lag NCC from scalar accumulation loops."""
    n = a.size
    flat_a = [float(v) for v in a.ravel()]
    flat_b = [float(v) for v in b.ravel()]
    mean_a = sum(flat_a) / n
    mean_b = sum(flat_b) / n
    num = 0.0
    den_a = 0.0
    den_b = 0.0
    for va, vb in zip(flat_a, flat_b):
        da, db = va - mean_a, vb - mean_b
        num += da * db
        den_a += da * da
        den_b += db * db
    return num / math.sqrt(den_a * den_b)


def oracle_propagate(seq, seeds, ssim_min, ncc_min, ssim_fn, ncc_fn):
    """Re-walk the propagation rule: anchor to seed, stop at first failure,
    resolve frame conflicts by (higher ncc, higher ssim, lower seed index).

    Returns {frame_index: (label_name, provenance)} for set-for-set comparison.
    """
    seed_frames = {s.frame_index for s in seeds}
    best = {}  # frame -> (label, ncc, ssim, seed_index)
    for seed in seeds:
        anchor = seq[seed.frame_index]
        for direction in (1, -1):
            i = seed.frame_index + direction
            while 0 <= i < len(seq):
                try:
                    s = ssim_fn(anchor, seq[i])
                    c = ncc_fn(anchor, seq[i])
                except Exception:
                    break
                if not (s > ssim_min and c > ncc_min):
                    break
                if i not in seed_frames:
                    candidate = (seed.label.name, c, s, seed.frame_index)
                    incumbent = best.get(i)
                    if incumbent is None:
                        best[i] = candidate
                    else:
                        _, c0, s0, f0 = incumbent
                        if (c, s, -seed.frame_index) > (c0, s0, -f0):
                            best[i] = candidate
                i += direction
    out = {s.frame_index: (s.label.name, "SEED") for s in seeds}
    for frame, (label, _, _, _) in best.items():
        out[frame] = (label, "PROPAGATED")
    return out


def oracle_runs(preds, tau, max_gap):
    """Per-label brute-force grouping; returns (label, start, end, peak, conf) tuples."""
    labels = sorted({p.argmax.name for p in preds if p.argmax.name != "NO_PLANE"})
    runs = []
    for label in labels:
        hits = [p for p in preds
                if p.argmax.name == label and p.confidence >= tau]
        hits.sort(key=lambda p: p.frame_index)
        cluster = []
        for p in hits:
            if cluster and p.frame_index - cluster[-1].frame_index > max_gap + 1:
                runs.append(_summarize(label, cluster))
                cluster = []
            cluster.append(p)
        if cluster:
            runs.append(_summarize(label, cluster))
    return sorted(runs)


def _summarize(label, cluster):
    peak = cluster[0]
    for p in cluster[1:]:
        if p.confidence > peak.confidence:
            peak = p
    return (cluster[0].frame_index, label, cluster[-1].frame_index,
            peak.frame_index, peak.confidence)


def oracle_confusion(pairs):
    """Plain dict tally keyed by (true name, pred name)."""
    tally = {}
    for true, pred in pairs:
        key = (true.name, pred.name)
        tally[key] = tally.get(key, 0) + 1
    return tally


def oracle_mean_sd(values):
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, None
    return mean, math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))
