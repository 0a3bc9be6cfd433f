"""Backends: mock marker protocol, ONNX loading/inference, batching invariance."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import make_frame, make_sequence
from natalia.classifier import (
    MockBackend,
    ModelNotFound,
    PlaneLabel,
    Prediction,
    ShapeMismatch,
    SizeMismatch,
    classify,
    classify_sequence,
    load_backend,
    marker_probs,
)
from natalia.simulate import generate_sweep, parse_spans, stamp_marker
from onnx_fixture import conv_model, linear_model


class TestPlaneLabel:
    def test_canonical_order(self):
        assert [l.name for l in PlaneLabel.canonical()] == [
            "AC", "BPD", "HS", "SS", "FL", "NO_PLANE",
        ]

    def test_planes_exclude_no_plane(self):
        assert [l.name for l in PlaneLabel.planes()] == ["AC", "BPD", "HS", "SS", "FL"]

    def test_parse(self):
        assert PlaneLabel.parse("fl") is PlaneLabel.FL
        with pytest.raises(ValueError):
            PlaneLabel.parse("XX")


class TestPrediction:
    def test_probs_must_sum_to_one(self):
        with pytest.raises(ValueError):
            Prediction(0, (0.5, 0.1, 0.1, 0.1, 0.1, 0.2))

    def test_argmax_tie_breaks_to_lowest_canonical(self):
        p = Prediction(0, (0.3, 0.3, 0.1, 0.1, 0.1, 0.1))
        assert p.argmax is PlaneLabel.AC

    def test_confidence_is_max(self):
        p = Prediction(0, (0.1, 0.6, 0.1, 0.1, 0.05, 0.05))
        assert p.confidence == 0.6
        assert p.argmax is PlaneLabel.BPD


def marked_frame(label: PlaneLabel, confidence: float, size=(224, 224), fill=128):
    px = np.full((size[1], size[0]), fill, np.uint8)
    stamp_marker(px, label, confidence)
    return make_frame(px)


class TestMockBackend:
    def test_descriptor_and_input_size(self):
        backend = load_backend("mock")
        assert backend.name == "mock"
        assert backend.input_size == (224, 224)

    def test_sized_descriptor(self):
        backend = load_backend("mock:32x32")
        assert backend.input_size == (32, 32)

    def test_unknown_descriptor(self):
        with pytest.raises(ModelNotFound):
            load_backend("magic")

    def test_marked_frame_round_trips(self):
        backend = MockBackend()
        for label in PlaneLabel.planes():
            for confidence in (0.3, 0.61, 0.95):
                pred = classify(backend, marked_frame(label, confidence))
                assert pred.argmax is label
                assert abs(pred.confidence - confidence) <= 1 / 255

    def test_probs_match_protocol_vector(self):
        backend = MockBackend()
        pred = classify(backend, marked_frame(PlaneLabel.HS, 0.8))
        quantized = round(0.8 * 255) / 255
        assert pred.probs == pytest.approx(marker_probs(PlaneLabel.HS, quantized), abs=1e-12)

    def test_mid_gray_frame_is_no_plane(self):
        backend = MockBackend()
        pred = classify(backend, make_frame(np.full((224, 224), 128, np.uint8)))
        assert pred.argmax is PlaneLabel.NO_PLANE

    def test_speckle_frame_is_no_plane(self, rng):
        backend = MockBackend()
        pred = classify(backend, make_frame(rng.integers(0, 256, (224, 224), dtype=np.uint8)))
        assert pred.argmax is PlaneLabel.NO_PLANE

    def test_probs_always_normalized(self, rng):
        backend = MockBackend()
        for _ in range(10):
            frame = make_frame(rng.integers(0, 256, (224, 224), dtype=np.uint8))
            pred = classify(backend, frame)
            assert abs(sum(pred.probs) - 1.0) <= 1e-6

    def test_size_mismatch(self):
        backend = MockBackend()
        with pytest.raises(SizeMismatch):
            classify(backend, make_frame(np.zeros((64, 64), np.uint8)))

    def test_determinism(self, rng):
        backend = MockBackend()
        frame = marked_frame(PlaneLabel.FL, 0.7)
        first = classify(backend, frame)
        assert all(classify(backend, frame).probs == first.probs for _ in range(3))


class TestClassifySequence:
    def test_empty_sequence(self):
        seq = make_sequence([])
        assert classify_sequence(MockBackend(), seq) == []

    def test_batching_invariance(self):
        seq, _ = generate_sweep(10, parse_spans("AC@2-4,SS@7-8"), size=(64, 64))
        backend = MockBackend(input_size=(64, 64))
        runs = [classify_sequence(backend, seq, batch=b) for b in (1, 4, 7, 16)]
        for other in runs[1:]:
            assert [p.probs for p in other] == [p.probs for p in runs[0]]

    def test_thousand_frames_preserve_indices(self):
        seq, _ = generate_sweep(1000, parse_spans("BPD@100-140"), size=(48, 32))
        preds = classify_sequence(MockBackend(input_size=(48, 32)), seq, batch=64)
        assert [p.frame_index for p in preds] == list(range(1000))

    def test_bad_batch(self):
        with pytest.raises(ValueError):
            classify_sequence(MockBackend(), make_sequence([]), batch=0)

    def test_size_error_names_frame(self):
        seq = make_sequence([np.zeros((16, 16), np.uint8)])
        with pytest.raises(SizeMismatch, match="frame 0"):
            classify_sequence(MockBackend(), seq)


class TestOnnxBackend:
    @pytest.fixture
    def linear_path(self, tmp_path, rng):
        weights = rng.normal(0, 0.2, (6, 16 * 16)).astype(np.float32)
        bias = rng.normal(0, 0.1, 6).astype(np.float32)
        path = tmp_path / "linear.onnx"
        path.write_bytes(linear_model(weights, bias, 16, 16))
        return path, weights, bias

    def test_load_and_validate(self, linear_path):
        path, _, _ = linear_path
        backend = load_backend(f"model:{path}")
        assert backend.input_size == (16, 16)
        assert backend.name == f"model:{path}"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelNotFound):
            load_backend(f"model:{tmp_path / 'absent.onnx'}")

    def test_five_way_head_rejected(self, tmp_path, rng):
        weights = rng.normal(0, 0.2, (5, 16 * 16)).astype(np.float32)
        path = tmp_path / "five.onnx"
        path.write_bytes(linear_model(weights, np.zeros(5, np.float32), 16, 16))
        with pytest.raises(ShapeMismatch):
            load_backend(f"model:{path}")

    def test_old_opset_rejected(self, tmp_path, rng):
        from natalia.classifier.onnx_backend import UnsupportedModel

        weights = rng.normal(0, 0.2, (6, 16 * 16)).astype(np.float32)
        path = tmp_path / "old.onnx"
        path.write_bytes(linear_model(weights, np.zeros(6, np.float32), 16, 16, opset=11))
        with pytest.raises(UnsupportedModel):
            load_backend(f"model:{path}")

    def test_zero_frame_probs_sum_to_one(self, linear_path):
        path, _, _ = linear_path
        backend = load_backend(f"model:{path}")
        pred = classify(backend, make_frame(np.zeros((16, 16), np.uint8)))
        assert abs(sum(pred.probs) - 1.0) <= 1e-6

    def test_matches_direct_linear_algebra(self, linear_path, rng):
        path, weights, bias = linear_path
        backend = load_backend(f"model:{path}")
        for _ in range(5):
            px = rng.integers(0, 256, (16, 16), dtype=np.uint8)
            pred = classify(backend, make_frame(px))
            x = (px.astype(np.float32) / 255.0).reshape(-1)
            logits = (x @ weights.T + bias).astype(np.float64)
            expected = np.exp(logits - logits.max())
            expected /= expected.sum()
            assert pred.probs == pytest.approx(expected, abs=1e-6)

    def test_conv_model_matches_manual_forward(self, tmp_path, rng):
        kernels = rng.normal(0, 0.5, (2, 1, 3, 3)).astype(np.float32)
        conv_bias = rng.normal(0, 0.1, 2).astype(np.float32)
        fc_w = rng.normal(0, 0.5, (6, 2)).astype(np.float32)
        fc_b = rng.normal(0, 0.1, 6).astype(np.float32)
        path = tmp_path / "conv.onnx"
        path.write_bytes(conv_model(kernels, conv_bias, fc_w, fc_b, 16, 16))
        backend = load_backend(f"model:{path}")

        px = rng.integers(0, 256, (16, 16), dtype=np.uint8)
        x = px.astype(np.float32) / 255.0
        padded = np.pad(x, 1)
        feats = []
        for k in range(2):
            acc = np.zeros((16, 16), np.float64)
            for dy in range(3):
                for dx in range(3):
                    acc += float(kernels[k, 0, dy, dx]) * padded[dy : dy + 16, dx : dx + 16]
            feats.append(np.maximum(acc + float(conv_bias[k]), 0.0).mean())
        logits = np.array(feats, np.float64) @ fc_w.T.astype(np.float64) + fc_b
        expected = np.exp(logits - logits.max())
        expected /= expected.sum()

        pred = classify(backend, make_frame(px))
        assert pred.probs == pytest.approx(expected, abs=1e-5)

    def test_batching_invariance(self, linear_path, rng):
        path, _, _ = linear_path
        backend = load_backend(f"model:{path}")
        arrays = [rng.integers(0, 256, (16, 16), dtype=np.uint8) for _ in range(6)]
        seq = make_sequence(arrays)
        a = classify_sequence(backend, seq, batch=1)
        b = classify_sequence(backend, seq, batch=6)
        assert [p.probs for p in a] == [p.probs for p in b]

    def test_bit_identical_across_calls(self, linear_path, rng):
        path, _, _ = linear_path
        backend = load_backend(f"model:{path}")
        frame = make_frame(rng.integers(0, 256, (16, 16), dtype=np.uint8))
        first = classify(backend, frame)
        for _ in range(3):
            assert classify(backend, frame).probs == first.probs

    def test_garbage_file_rejected(self, tmp_path):
        from natalia.classifier.onnx_backend import UnsupportedModel

        path = tmp_path / "junk.onnx"
        path.write_bytes(b"\xffnot protobuf\x00" * 10)
        with pytest.raises((UnsupportedModel, ShapeMismatch)):
            load_backend(f"model:{path}")
