"""Evaluation harness: confusion matrices, agreement reports, TLX aggregation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import N_LABELS, PlaneLabel


class MetricsError(Exception):
    pass


class EmptyMatrix(MetricsError):
    pass


class EmptyInput(MetricsError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    """6x6 counts; rows are true labels, columns predictions, canonical order."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (N_LABELS, N_LABELS):
            raise ValueError(f"confusion matrix must be {N_LABELS}x{N_LABELS}")
        if (counts < 0).any():
            raise ValueError("confusion matrix counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion(pairs: list[tuple[PlaneLabel, PlaneLabel]]) -> ConfusionMatrix:
    counts = np.zeros((N_LABELS, N_LABELS), dtype=np.int64)
    for true, pred in pairs:
        counts[true.value, pred.value] += 1
    return ConfusionMatrix(counts)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyMatrix("no scored pairs")
    return float(np.trace(cm.counts)) / cm.total


def per_class(cm: ConfusionMatrix) -> dict[str, dict[str, float]]:
    """Per-label precision/recall/F1 with the 0/0 -> 0 convention."""
    if cm.total == 0:
        raise EmptyMatrix("no scored pairs")
    out = {}
    for label in PlaneLabel.canonical():
        i = label.value
        tp = float(cm.counts[i, i])
        col = float(cm.counts[:, i].sum())
        row = float(cm.counts[i, :].sum())
        precision = tp / col if col else 0.0
        recall = tp / row if row else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out[label.name] = {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "support": int(row),
        }
    return out


def macro_f1(cm: ConfusionMatrix) -> float:
    """Unweighted mean of per-class F1 over all six labels."""
    scores = per_class(cm)
    return sum(v["f1"] for v in scores.values()) / N_LABELS


def weighted_f1(cm: ConfusionMatrix) -> float:
    """Support-weighted mean of per-class F1 (reported next to macro-F1)."""
    scores = per_class(cm)
    total = cm.total
    return sum(v["f1"] * v["support"] for v in scores.values()) / total


# --- system vs specialist agreement ------------------------------------------

AGREE_PRESENT = "agree_present"
AGREE_ABSENT = "agree_absent"
MISMATCH = "mismatch"


@dataclass(frozen=True)
class AgreementRow:
    """Per-study plane counts from the pipeline and from specialist review."""

    study_id: str
    system_counts: dict[str, int]
    specialist_counts: dict[str, int]

    def __post_init__(self):
        want = {label.name for label in PlaneLabel.planes()}
        for name, counts in (("system", self.system_counts), ("specialist", self.specialist_counts)):
            if set(counts) != want:
                raise ValueError(f"{name} counts must cover exactly {sorted(want)}")
            if any(v < 0 for v in counts.values()):
                raise ValueError(f"{name} counts must be non-negative")


def agreement_report(rows: list[AgreementRow]) -> dict:
    """Presence agreement and count deltas per row and label, plus aggregate.

    Presence agreement means both sides saw the plane (both counts > 0) or
    both missed it (both 0); anything else is a mismatch. The aggregate rate
    is agreements over rows x labels.
    """
    labels = [label.name for label in PlaneLabel.planes()]
    report_rows = []
    agree = 0
    for row in rows:
        cells = {}
        for name in labels:
            sys_n = row.system_counts[name]
            spec_n = row.specialist_counts[name]
            if sys_n > 0 and spec_n > 0:
                status = AGREE_PRESENT
            elif sys_n == 0 and spec_n == 0:
                status = AGREE_ABSENT
            else:
                status = MISMATCH
            if status != MISMATCH:
                agree += 1
            cells[name] = {
                "system": sys_n,
                "specialist": spec_n,
                "delta": sys_n - spec_n,
                "status": status,
            }
        report_rows.append({"study_id": row.study_id, "labels": cells})
    scored = len(rows) * len(labels)
    return {
        "labels": labels,
        "rows": report_rows,
        "presence_agreement_rate": agree / scored if scored else None,
        "scored_cells": scored,
        "mismatches": scored - agree if scored else 0,
    }


# --- NASA-TLX -----------------------------------------------------------------

TLX_DIMENSIONS = ("mental", "physical", "temporal", "performance", "effort", "frustration")


@dataclass(frozen=True)
class TlxResponse:
    """One participant's six subscale scores, each 0..100 in steps of 5."""

    participant: str
    scores: dict[str, float]

    def __post_init__(self):
        if set(self.scores) != set(TLX_DIMENSIONS):
            raise ValueError(f"scores must cover exactly {TLX_DIMENSIONS}")
        for dim, v in self.scores.items():
            if not 0 <= v <= 100:
                raise ValueError(f"{dim} score {v} outside [0, 100]")
            if v % 5 != 0:
                raise ValueError(f"{dim} score {v} is not a multiple of 5")

    @property
    def raw_tlx(self) -> float:
        """Raw (unweighted) TLX: the mean of the six subscales."""
        return sum(self.scores[d] for d in TLX_DIMENSIONS) / len(TLX_DIMENSIONS)


def mean_sd(values: list[float]) -> tuple[float, float | None]:
    """Mean and sample standard deviation (n-1); SD is None for n < 2."""
    n = len(values)
    if n == 0:
        raise EmptyInput("no values")
    mean = sum(values) / n
    if n < 2:
        return mean, None
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def aggregate_tlx(responses: list[TlxResponse]) -> dict:
    """Per-dimension M/SD plus the raw TLX summary across respondents."""
    if not responses:
        raise EmptyInput("no TLX responses")
    dims = {}
    for dim in TLX_DIMENSIONS:
        mean, sd = mean_sd([r.scores[dim] for r in responses])
        dims[dim] = {"mean": mean, "sd": sd}
    raw_mean, raw_sd = mean_sd([r.raw_tlx for r in responses])
    return {
        "n": len(responses),
        "dimensions": dims,
        "raw_tlx": {"mean": raw_mean, "sd": raw_sd},
    }


# --- CSV inputs ----------------------------------------------------------------


def read_pairs_csv(path: str | Path) -> list[tuple[PlaneLabel, PlaneLabel]]:
    """(true, predicted) label pairs from CSV with header true,pred."""
    pairs = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"true", "pred"}.issubset(reader.fieldnames):
            raise MetricsError(f"{path}: header must contain true,pred")
        for lineno, row in enumerate(reader, start=2):
            try:
                pairs.append((PlaneLabel.parse(row["true"]), PlaneLabel.parse(row["pred"])))
            except ValueError as exc:
                raise MetricsError(f"{path}:{lineno}: {exc}") from None
    return pairs


def read_agreement_csv(path: str | Path) -> list[AgreementRow]:
    """Agreement rows from CSV: study_id,sys_AC,...,sys_FL,spec_AC,...,spec_FL."""
    labels = [label.name for label in PlaneLabel.planes()]
    want = ["study_id"] + [f"sys_{l}" for l in labels] + [f"spec_{l}" for l in labels]
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(want).issubset(reader.fieldnames):
            raise MetricsError(f"{path}: header must contain {','.join(want)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(AgreementRow(
                    study_id=row["study_id"].strip(),
                    system_counts={l: int(row[f"sys_{l}"]) for l in labels},
                    specialist_counts={l: int(row[f"spec_{l}"]) for l in labels},
                ))
            except (TypeError, ValueError) as exc:
                raise MetricsError(f"{path}:{lineno}: {exc}") from None
    return rows


def read_tlx_csv(path: str | Path) -> list[TlxResponse]:
    """TLX responses from CSV: participant,mental,physical,temporal,performance,effort,frustration."""
    want = ("participant",) + TLX_DIMENSIONS
    responses = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(want).issubset(reader.fieldnames):
            raise MetricsError(f"{path}: header must contain {','.join(want)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                responses.append(TlxResponse(
                    participant=row["participant"].strip(),
                    scores={d: float(row[d]) for d in TLX_DIMENSIONS},
                ))
            except (TypeError, ValueError) as exc:
                raise MetricsError(f"{path}:{lineno}: {exc}") from None
    return responses
