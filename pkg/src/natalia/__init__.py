"""Blind-sweep obstetric ultrasound triage pipeline and review service."""

__version__ = "0.1.0"

from . import classifier, dataset, keyframes, media, metrics, simulate

__all__ = ["classifier", "dataset", "keyframes", "media", "metrics", "simulate", "__version__"]
