"""Fetal-plane classification backends and the prediction data model."""

from .core import (
    ClassifierError,
    MARKER_BLOCK,
    MARKER_LEVELS,
    MARKER_LEVEL_TOL,
    MARKER_STD_TOL,
    MockBackend,
    ModelNotFound,
    N_LABELS,
    NO_MARKER_PROBS,
    PlaneLabel,
    Prediction,
    ShapeMismatch,
    SizeMismatch,
    classify,
    classify_sequence,
    load_backend,
    marker_probs,
)

__all__ = [
    "ClassifierError",
    "MARKER_BLOCK",
    "MARKER_LEVELS",
    "MARKER_LEVEL_TOL",
    "MARKER_STD_TOL",
    "MockBackend",
    "ModelNotFound",
    "N_LABELS",
    "NO_MARKER_PROBS",
    "PlaneLabel",
    "Prediction",
    "ShapeMismatch",
    "SizeMismatch",
    "classify",
    "classify_sequence",
    "load_backend",
    "marker_probs",
]
