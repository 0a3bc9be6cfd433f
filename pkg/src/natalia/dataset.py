"""Dataset expansion: seed-label propagation, negative subsampling, splits.

Seed annotations are walked outward one frame at a time; a neighbor joins the
manifest only while both similarity measures against the *seed* frame clear
their thresholds (anchoring to the seed keeps labels from drifting away from
the annotated anatomy). Negatives are a seeded uniform subsample, and the
train/validation split is stratified per label.

All randomness comes from numpy's PCG64 so manifests are bit-reproducible:
rng = np.random.Generator(np.random.PCG64(seed)); the split derives one
stream per label via np.random.SeedSequence([seed, label_index]).
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .classifier import PlaneLabel
from .media.frames import FrameSequence, SimilarityScore
from .media.similarity import DegenerateVariance, ncc, ssim

log = logging.getLogger(__name__)

MANIFEST_SCHEMA = "natalia-manifest/1"


class DatasetError(Exception):
    pass


class IndexOutOfRange(DatasetError):
    pass


class AlreadySplit(DatasetError):
    pass


class SchemaViolation(DatasetError):
    """A manifest file does not conform; the message names the entry/field."""


class Provenance(Enum):
    SEED = "SEED"
    PROPAGATED = "PROPAGATED"
    NEGATIVE_SAMPLED = "NEGATIVE_SAMPLED"


class Split(Enum):
    TRAIN = "TRAIN"
    VAL = "VAL"
    UNASSIGNED = "UNASSIGNED"


@dataclass(frozen=True)
class SeedAnnotation:
    source_id: str
    frame_index: int
    label: PlaneLabel


@dataclass(frozen=True)
class ManifestEntry:
    source_id: str
    frame_index: int
    label: PlaneLabel
    provenance: Provenance
    similarity: SimilarityScore | None = None
    split: Split = Split.UNASSIGNED

    def __post_init__(self):
        if self.provenance is Provenance.PROPAGATED and self.similarity is None:
            raise ValueError("PROPAGATED entries must carry their similarity to the seed")

    @property
    def key(self) -> tuple[str, int]:
        return self.source_id, self.frame_index


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    ssim_min: float = 0.90
    ncc_min: float = 0.90
    rng_seed: int = 0

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.key in seen:
                raise ValueError(f"duplicate manifest entry for {e.key}")
            seen.add(e.key)

    @property
    def class_counts(self) -> dict[str, int]:
        counts = {label.name: 0 for label in PlaneLabel.canonical()}
        for e in self.entries:
            counts[e.label.name] += 1
        return counts

    @property
    def split_counts(self) -> dict[str, dict[str, int]]:
        out = {s.value: {label.name: 0 for label in PlaneLabel.canonical()} for s in Split}
        for e in self.entries:
            out[e.split.value][e.label.name] += 1
        return out


def propagate_labels(seq: FrameSequence, seeds: list[SeedAnnotation],
                     ssim_min: float = 0.90, ncc_min: float = 0.90) -> list[ManifestEntry]:
    """Expand seed annotations to similar consecutive frames of one sequence.

    Walks forward then backward from each seed; a neighbor is included iff
    both ssim and ncc against the seed frame strictly exceed the thresholds,
    and each direction stops at its first failure. Zero-variance comparisons
    count as failures (logged). When two seeds reach the same frame the entry
    with higher ncc wins, then higher ssim, then the lower seed frame index.
    Entries come back sorted by frame index.
    """
    if not 0.0 < ssim_min <= 1.0 or not 0.0 < ncc_min <= 1.0:
        raise ValueError("thresholds must lie in (0, 1]")
    for seed in seeds:
        if seed.source_id != seq.source_id:
            raise IndexOutOfRange(
                f"seed targets sequence {seed.source_id!r}, not {seq.source_id!r}"
            )
        if not 0 <= seed.frame_index < len(seq):
            raise IndexOutOfRange(
                f"seed frame {seed.frame_index} outside sequence of {len(seq)} frames"
            )
        if seed.label is PlaneLabel.NO_PLANE:
            raise ValueError("seeds must carry a plane label, not NO_PLANE")

    seed_frames = {s.frame_index for s in seeds}
    # candidate per frame: (entry, seed_frame_index); seeds always win their own frame
    chosen: dict[int, tuple[ManifestEntry, int]] = {}
    for seed in seeds:
        if seed.frame_index in chosen and chosen[seed.frame_index][0].provenance is Provenance.SEED:
            raise ValueError(f"conflicting seed annotations at frame {seed.frame_index}")
        chosen[seed.frame_index] = (
            ManifestEntry(seq.source_id, seed.frame_index, seed.label, Provenance.SEED),
            seed.frame_index,
        )

    for seed in seeds:
        anchor = seq[seed.frame_index]
        for step in (1, -1):
            i = seed.frame_index + step
            while 0 <= i < len(seq):
                try:
                    score = SimilarityScore(ssim=ssim(anchor, seq[i]), ncc=ncc(anchor, seq[i]))
                except DegenerateVariance:
                    log.info("propagation stopped at %s frame %d: degenerate variance",
                             seq.source_id, i)
                    break
                if not (score.ssim > ssim_min and score.ncc > ncc_min):
                    break
                if i not in seed_frames:
                    candidate = ManifestEntry(
                        seq.source_id, i, seed.label, Provenance.PROPAGATED, similarity=score
                    )
                    incumbent = chosen.get(i)
                    if incumbent is None or _beats(candidate, seed.frame_index, *incumbent):
                        chosen[i] = (candidate, seed.frame_index)
                i += step

    return [chosen[i][0] for i in sorted(chosen)]


def _beats(challenger: ManifestEntry, challenger_seed: int,
           incumbent: ManifestEntry, incumbent_seed: int) -> bool:
    if incumbent.provenance is Provenance.SEED:
        return False
    a, b = challenger.similarity, incumbent.similarity
    if a.ncc != b.ncc:
        return a.ncc > b.ncc
    if a.ssim != b.ssim:
        return a.ssim > b.ssim
    return challenger_seed < incumbent_seed


def subsample_negatives(candidates: list[tuple[str, int]], fraction: float,
                        rng_seed: int) -> list[ManifestEntry]:
    """Pick floor(fraction * n) negative frames uniformly without replacement.

    candidates are (source_id, frame_index) pairs; the selection is fixed by
    rng_seed (PCG64) and independent of the input order.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    ordered = sorted(set(candidates))
    k = int(fraction * len(ordered))
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    picked = rng.choice(len(ordered), size=k, replace=False) if k else []
    return [
        ManifestEntry(ordered[i][0], ordered[i][1], PlaneLabel.NO_PLANE,
                      Provenance.NEGATIVE_SAMPLED)
        for i in sorted(picked)
    ]


def split_dataset(manifest: DatasetManifest, train_fraction: float,
                  rng_seed: int) -> DatasetManifest:
    """Assign TRAIN/VAL stratified per label.

    Each label's entries are shuffled with their own PCG64 stream and the
    first floor(train_fraction * n) go to TRAIN. A single-entry label lands
    entirely in VAL (floor rule) and is flagged with a warning.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    if any(e.split is not Split.UNASSIGNED for e in manifest.entries):
        raise AlreadySplit("manifest already carries split assignments")

    assignment: dict[tuple[str, int], Split] = {}
    for label in PlaneLabel.canonical():
        members = sorted(
            (e for e in manifest.entries if e.label is label),
            key=lambda e: e.key,
        )
        if not members:
            continue
        n_train = int(train_fraction * len(members))
        if len(members) == 1:
            log.warning("label %s has a single entry; it goes to VAL", label.name)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([rng_seed, label.value])))
        order = rng.permutation(len(members))
        for rank, idx in enumerate(order):
            assignment[members[idx].key] = Split.TRAIN if rank < n_train else Split.VAL

    entries = tuple(replace(e, split=assignment[e.key]) for e in manifest.entries)
    return replace(manifest, entries=entries, rng_seed=rng_seed)


# --- manifest file format ----------------------------------------------------


def manifest_to_dict(manifest: DatasetManifest) -> dict:
    return {
        "schema": MANIFEST_SCHEMA,
        "thresholds": {"ssim_min": manifest.ssim_min, "ncc_min": manifest.ncc_min},
        "rng_seed": manifest.rng_seed,
        "class_counts": manifest.class_counts,
        "entries": [
            {
                "source_id": e.source_id,
                "frame_index": e.frame_index,
                "label": e.label.name,
                "provenance": e.provenance.value,
                "similarity": None if e.similarity is None
                else {"ssim": e.similarity.ssim, "ncc": e.similarity.ncc},
                "split": e.split.value,
            }
            for e in manifest.entries
        ],
    }


def write_manifest(manifest: DatasetManifest, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest_to_dict(manifest), sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return path


def _entry_from_dict(raw: dict, pos: int) -> ManifestEntry:
    where = f"entries[{pos}]"
    for required in ("source_id", "frame_index", "label", "provenance", "split"):
        if required not in raw:
            raise SchemaViolation(f"{where}: missing field {required!r}")
    try:
        label = PlaneLabel.parse(str(raw["label"]))
    except ValueError as exc:
        raise SchemaViolation(f"{where}: {exc}") from None
    try:
        provenance = Provenance(raw["provenance"])
    except ValueError:
        raise SchemaViolation(f"{where}: unknown provenance {raw['provenance']!r}") from None
    try:
        split = Split(raw["split"])
    except ValueError:
        raise SchemaViolation(f"{where}: unknown split {raw['split']!r}") from None
    if not isinstance(raw["frame_index"], int) or raw["frame_index"] < 0:
        raise SchemaViolation(f"{where}: frame_index must be a non-negative integer")
    sim = raw.get("similarity")
    score = None
    if sim is not None:
        try:
            score = SimilarityScore(ssim=float(sim["ssim"]), ncc=float(sim["ncc"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"{where}: bad similarity ({exc})") from None
    try:
        return ManifestEntry(str(raw["source_id"]), raw["frame_index"], label,
                             provenance, similarity=score, split=split)
    except ValueError as exc:
        raise SchemaViolation(f"{where}: {exc}") from None


def read_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: not valid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("schema") != MANIFEST_SCHEMA:
        raise SchemaViolation(f"{path}: schema must be {MANIFEST_SCHEMA!r}")
    thresholds = doc.get("thresholds", {})
    entries = doc.get("entries")
    if not isinstance(entries, list):
        raise SchemaViolation(f"{path}: entries must be a list")
    parsed = tuple(_entry_from_dict(raw, pos) for pos, raw in enumerate(entries))
    try:
        manifest = DatasetManifest(
            entries=parsed,
            ssim_min=float(thresholds.get("ssim_min", 0.90)),
            ncc_min=float(thresholds.get("ncc_min", 0.90)),
            rng_seed=int(doc.get("rng_seed", 0)),
        )
    except ValueError as exc:
        raise SchemaViolation(f"{path}: {exc}") from None
    declared = doc.get("class_counts")
    if declared is not None and declared != manifest.class_counts:
        raise SchemaViolation(
            f"{path}: class_counts do not match entries (declared {declared}, "
            f"recomputed {manifest.class_counts})"
        )
    return manifest


def read_seeds_csv(path: str | Path) -> list[SeedAnnotation]:
    """Seed annotations from CSV with header source_id,frame_index,label."""
    path = Path(path)
    seeds = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = {"source_id", "frame_index", "label"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise SchemaViolation(f"{path}: header must contain {sorted(expected)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                seeds.append(SeedAnnotation(
                    source_id=row["source_id"].strip(),
                    frame_index=int(row["frame_index"]),
                    label=PlaneLabel.parse(row["label"]),
                ))
            except (TypeError, ValueError) as exc:
                raise SchemaViolation(f"{path}:{lineno}: {exc}") from None
    return seeds
