"""Report bundles: files written, text layout, figure determinism."""

from __future__ import annotations

import pytest

from natalia.classifier import MockBackend, PlaneLabel
from natalia.keyframes import process_sweep
from natalia.metrics import (
    AgreementRow,
    TlxResponse,
    agreement_report,
    aggregate_tlx,
    confusion,
)
from natalia.reports import (
    render_agreement_text,
    render_confusion_text,
    render_tlx_text,
    write_agreement_bundle,
    write_classification_bundle,
    write_timeline_figure,
    write_tlx_bundle,
)
from natalia.simulate import generate_sweep, parse_spans

LABELS = ["AC", "BPD", "HS", "SS", "FL"]


@pytest.fixture
def cm():
    pairs = [(PlaneLabel.AC, PlaneLabel.AC)] * 5 + [(PlaneLabel.FL, PlaneLabel.AC)] * 2
    return confusion(pairs)


def test_classification_bundle(tmp_path, cm):
    report = write_classification_bundle(cm, tmp_path)
    for name in ("report.json", "report.txt", "report.csv", "confusion_matrix.png"):
        assert (tmp_path / name).exists(), name
    assert report["accuracy"] == pytest.approx(5 / 7)
    text = (tmp_path / "report.txt").read_text()
    assert "accuracy" in text and "macro F1" in text and "weighted F1" in text


def test_confusion_text_table_shape(cm):
    lines = render_confusion_text(cm).splitlines()
    assert lines[0].split() == ["true", "\\", "pred"] + [l.name for l in PlaneLabel.canonical()]
    assert len([l for l in lines if l and not l.startswith(("accuracy", "macro", "weighted"))]) >= 7


def test_agreement_bundle_layout(tmp_path):
    rows = [AgreementRow("midwife1", dict(zip(LABELS, (6, 10, 4, 1, 10))),
                         dict(zip(LABELS, (3, 4, 4, 9, 5))))]
    report = agreement_report(rows)
    write_agreement_bundle(report, tmp_path)
    text = (tmp_path / "report.txt").read_text()
    # side-by-side layout: both count blocks on one row, then the delta table
    row_line = next(l for l in text.splitlines() if l.startswith("midwife1"))
    assert "||" in row_line
    assert "+3" in text and "-8" in text
    assert (tmp_path / "agreement_deltas.png").exists()
    csv_text = (tmp_path / "report.csv").read_text()
    assert "midwife1,AC,6,3,3,agree_present" in csv_text


def test_tlx_bundle_m_sd_format(tmp_path):
    responses = [
        TlxResponse(f"p{i}", {"mental": v, "physical": 10, "temporal": 15,
                              "performance": 80, "effort": 25, "frustration": 20})
        for i, v in enumerate([10, 20, 30, 40])
    ]
    summary = aggregate_tlx(responses)
    write_tlx_bundle(summary, tmp_path)
    text = (tmp_path / "report.txt").read_text()
    assert "mental       M = 25.00, SD = 12.91" in text
    assert "raw TLX" in text
    assert (tmp_path / "tlx_scores.png").exists()


def test_text_renderers_handle_single_response():
    summary = aggregate_tlx([TlxResponse("solo", {d: 50 for d in (
        "mental", "physical", "temporal", "performance", "effort", "frustration")})])
    assert "SD = n/a" in render_tlx_text(summary)


def test_empty_agreement_renders():
    assert "presence agreement" not in render_agreement_text(agreement_report([]))


def test_figures_are_byte_deterministic(tmp_path, cm):
    write_classification_bundle(cm, tmp_path / "a")
    write_classification_bundle(cm, tmp_path / "b")
    assert ((tmp_path / "a" / "confusion_matrix.png").read_bytes()
            == (tmp_path / "b" / "confusion_matrix.png").read_bytes())


def test_timeline_figure(tmp_path):
    seq, _ = generate_sweep(30, parse_spans("AC@5-9"), size=(64, 64))
    result = process_sweep(seq, MockBackend(input_size=(64, 64)))
    write_timeline_figure(result, tmp_path / "timeline.png")
    assert (tmp_path / "timeline.png").stat().st_size > 0
