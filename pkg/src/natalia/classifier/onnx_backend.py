"""ONNX model loading and inference without an external runtime.

Reads the ONNX protobuf wire format directly (field numbers are public and
frozen) and evaluates a compact op subset sufficient for small image
classifiers: Conv, BatchNormalization, Relu, MaxPool, GlobalAveragePool,
Flatten, Reshape, Gemm, MatMul, Add, Identity, Dropout, Softmax.

Contract: single NxCxHxW input, single Nx6 logits output, default-domain
opset >= 13. Preprocessing is fixed as grayscale -> resize -> scale to [0,1]
-> replicate to the declared channel count; the softmax lives here, not in
the graph.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import ClassifierError, ModelNotFound, N_LABELS, ShapeMismatch


class UnsupportedModel(ClassifierError):
    """The model file is malformed or uses graph features outside the subset."""


# --- protobuf wire-format primitives ---------------------------------------


def _read_varint(buf: bytes, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if pos >= len(buf):
            raise UnsupportedModel("truncated varint in model file")
        b = buf[pos]
        pos += 1
        result |= (b & 0x7F) << shift
        if not b & 0x80:
            return result, pos
        shift += 7
        if shift > 70:
            raise UnsupportedModel("varint overflow in model file")


def _to_int64(v: int) -> int:
    return v - (1 << 64) if v >= (1 << 63) else v


def _parse_message(buf: bytes) -> dict[int, list]:
    """Split a protobuf message into {field_number: [raw values]}.

    Length-delimited values stay as bytes; varints as ints; fixed32/64 as bytes.
    """
    fields: dict[int, list] = {}
    pos = 0
    while pos < len(buf):
        key, pos = _read_varint(buf, pos)
        field, wire = key >> 3, key & 0x7
        if wire == 0:
            value, pos = _read_varint(buf, pos)
        elif wire == 1:
            value, pos = buf[pos : pos + 8], pos + 8
        elif wire == 2:
            length, pos = _read_varint(buf, pos)
            value, pos = buf[pos : pos + length], pos + length
            if len(value) != length:
                raise UnsupportedModel("truncated field in model file")
        elif wire == 5:
            value, pos = buf[pos : pos + 4], pos + 4
        else:
            raise UnsupportedModel(f"unsupported wire type {wire}")
        fields.setdefault(field, []).append(value)
    return fields


def _packed_varints(values: list) -> list[int]:
    """Repeated int64 field: accept packed payloads and individual varints."""
    out: list[int] = []
    for v in values:
        if isinstance(v, int):
            out.append(_to_int64(v))
        else:
            pos = 0
            while pos < len(v):
                x, pos = _read_varint(v, pos)
                out.append(_to_int64(x))
    return out


def _packed_floats(values: list) -> np.ndarray:
    parts = []
    for v in values:
        if isinstance(v, bytes):
            parts.append(np.frombuffer(v, dtype="<f4"))
        else:
            raise UnsupportedModel("unexpected scalar in packed float field")
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.float32)


def _string(values: list, default: str = "") -> str:
    return values[0].decode("utf-8") if values else default


# --- ONNX message readers (field numbers from onnx.proto) -------------------

_DT_FLOAT, _DT_INT64, _DT_DOUBLE = 1, 7, 11


def _parse_tensor(buf: bytes) -> tuple[str, np.ndarray]:
    f = _parse_message(buf)
    dims = _packed_varints(f.get(1, []))
    dtype = f.get(2, [1])[0]
    name = _string(f.get(8, []))
    raw = f.get(9, [None])[0]
    if raw is not None:
        if dtype == _DT_FLOAT:
            arr = np.frombuffer(raw, dtype="<f4").astype(np.float32)
        elif dtype == _DT_INT64:
            arr = np.frombuffer(raw, dtype="<i8")
        elif dtype == _DT_DOUBLE:
            arr = np.frombuffer(raw, dtype="<f8").astype(np.float32)
        else:
            raise UnsupportedModel(f"tensor {name!r}: unsupported data type {dtype}")
    elif dtype == _DT_FLOAT:
        arr = _packed_floats(f.get(4, [])).astype(np.float32)
    elif dtype == _DT_INT64:
        arr = np.array(_packed_varints(f.get(7, [])), dtype=np.int64)
    else:
        raise UnsupportedModel(f"tensor {name!r}: unsupported data type {dtype}")
    return name, arr.reshape(dims) if dims else arr


def _parse_attributes(values: list) -> dict[str, object]:
    attrs: dict[str, object] = {}
    for buf in values:
        f = _parse_message(buf)
        name = _string(f.get(1, []))
        if 2 in f:  # float
            attrs[name] = struct.unpack("<f", f[2][0])[0]
        elif 3 in f:  # int
            attrs[name] = _to_int64(f[3][0])
        elif 8 in f:  # ints
            attrs[name] = _packed_varints(f[8])
        elif 7 in f:  # floats
            attrs[name] = _packed_floats(f[7]).tolist()
        elif 4 in f:  # string
            attrs[name] = f[4][0].decode("utf-8", "replace")
        elif 5 in f:  # tensor
            attrs[name] = _parse_tensor(f[5][0])[1]
        # graph-valued and other attribute kinds are outside the subset
    return attrs


def _parse_value_info(buf: bytes) -> tuple[str, list[int | None]]:
    f = _parse_message(buf)
    name = _string(f.get(1, []))
    shape: list[int | None] = []
    if 2 in f:
        type_f = _parse_message(f[2][0])
        if 1 in type_f:  # tensor_type
            tt = _parse_message(type_f[1][0])
            if 2 in tt:  # shape
                for dim_buf in _parse_message(tt[2][0]).get(1, []):
                    d = _parse_message(dim_buf)
                    shape.append(_to_int64(d[1][0]) if 1 in d else None)
    return name, shape


class _Node:
    __slots__ = ("op", "inputs", "outputs", "attrs")

    def __init__(self, buf: bytes):
        f = _parse_message(buf)
        self.inputs = [v.decode("utf-8") for v in f.get(1, [])]
        self.outputs = [v.decode("utf-8") for v in f.get(2, [])]
        self.op = _string(f.get(4, []))
        self.attrs = _parse_attributes(f.get(5, []))


def _parse_model(blob: bytes):
    model = _parse_message(blob)
    opset = 0
    for op_buf in model.get(8, []):
        f = _parse_message(op_buf)
        domain = _string(f.get(1, []))
        if domain in ("", "ai.onnx"):
            opset = max(opset, f.get(2, [0])[0])
    if 7 not in model:
        raise UnsupportedModel("model file has no graph")
    graph = _parse_message(model[7][0])
    nodes = [_Node(b) for b in graph.get(1, [])]
    initializers = dict(_parse_tensor(b) for b in graph.get(5, []))
    inputs = [_parse_value_info(b) for b in graph.get(11, [])]
    outputs = [_parse_value_info(b) for b in graph.get(12, [])]
    return opset, nodes, initializers, inputs, outputs


# --- evaluation --------------------------------------------------------------


def _conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray | None, attrs: dict) -> np.ndarray:
    group = int(attrs.get("group", 1))
    dil = attrs.get("dilations", [1, 1])
    if group != 1 or list(dil) != [1, 1]:
        raise UnsupportedModel("Conv supports group=1, dilation=1 only")
    sh, sw = attrs.get("strides", [1, 1])
    pads = attrs.get("pads", [0, 0, 0, 0])
    n, c, h, wdt = x.shape
    m, _, kh, kw = w.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pads[0], pads[2]), (pads[1], pads[3])))
    oh = (xp.shape[2] - kh) // sh + 1
    ow = (xp.shape[3] - kw) // sw + 1
    # im2col: windows (n, c, oh, ow, kh, kw) -> (n, oh*ow, c*kh*kw)
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n, oh * ow, c * kh * kw)
    out = cols @ w.reshape(m, -1).T
    out = out.transpose(0, 2, 1).reshape(n, m, oh, ow)
    if b is not None:
        out = out + b.reshape(1, m, 1, 1)
    return out.astype(np.float32)


def _maxpool(x: np.ndarray, attrs: dict) -> np.ndarray:
    kh, kw = attrs["kernel_shape"]
    sh, sw = attrs.get("strides", [kh, kw])
    pads = attrs.get("pads", [0, 0, 0, 0])
    xp = np.pad(x, ((0, 0), (0, 0), (pads[0], pads[2]), (pads[1], pads[3])),
                constant_values=-np.inf)
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
    return win.max(axis=(4, 5)).astype(np.float32)


def _evaluate(nodes: list[_Node], values: dict[str, np.ndarray]) -> None:
    for node in nodes:
        ins = [values[name] if name else None for name in node.inputs]
        op = node.op
        if op == "Conv":
            out = _conv2d(ins[0], ins[1], ins[2] if len(ins) > 2 else None, node.attrs)
        elif op == "Relu":
            out = np.maximum(ins[0], 0.0)
        elif op == "MaxPool":
            out = _maxpool(ins[0], node.attrs)
        elif op == "GlobalAveragePool":
            out = ins[0].mean(axis=(2, 3), keepdims=True).astype(np.float32)
        elif op == "BatchNormalization":
            x, scale, bias, mean, var = ins[:5]
            eps = node.attrs.get("epsilon", 1e-5)
            shape = (1, -1) + (1,) * (x.ndim - 2)
            out = ((x - mean.reshape(shape)) / np.sqrt(var.reshape(shape) + eps)
                   * scale.reshape(shape) + bias.reshape(shape)).astype(np.float32)
        elif op == "Flatten":
            axis = int(node.attrs.get("axis", 1))
            lead = int(np.prod(ins[0].shape[:axis])) if axis else 1
            out = ins[0].reshape(lead, -1)
        elif op == "Reshape":
            shape = [int(s) for s in np.asarray(ins[1]).ravel()]
            shape = [ins[0].shape[i] if s == 0 else s for i, s in enumerate(shape)]
            out = ins[0].reshape(shape)
        elif op == "Gemm":
            a, b = ins[0], ins[1]
            if node.attrs.get("transA", 0):
                a = a.T
            if node.attrs.get("transB", 0):
                b = b.T
            out = node.attrs.get("alpha", 1.0) * (a @ b)
            if len(ins) > 2 and ins[2] is not None:
                out = out + node.attrs.get("beta", 1.0) * ins[2]
            out = out.astype(np.float32)
        elif op == "MatMul":
            out = (ins[0] @ ins[1]).astype(np.float32)
        elif op == "Add":
            out = (ins[0] + ins[1]).astype(np.float32)
        elif op in ("Identity", "Dropout"):
            out = ins[0]
        elif op == "Softmax":
            axis = int(node.attrs.get("axis", -1))
            z = ins[0] - ins[0].max(axis=axis, keepdims=True)
            e = np.exp(z)
            out = (e / e.sum(axis=axis, keepdims=True)).astype(np.float32)
        else:
            raise UnsupportedModel(f"op {op!r} is outside the supported subset")
        values[node.outputs[0]] = out
        for extra in node.outputs[1:]:
            if extra:
                values[extra] = out


class OnnxBackend:
    """Runs an exported 6-way classifier from an ONNX file."""

    def __init__(self, path: str | Path):
        path = Path(path)
        if not path.is_file():
            raise ModelNotFound(f"model file not found: {path}")
        try:
            opset, nodes, inits, inputs, outputs = _parse_model(path.read_bytes())
        except UnsupportedModel:
            raise
        except Exception as exc:
            raise UnsupportedModel(f"{path}: not a readable ONNX file ({exc})") from exc
        if opset and opset < 13:
            raise UnsupportedModel(f"{path}: opset {opset} < 13")
        real_inputs = [(n, s) for n, s in inputs if n not in inits]
        if len(real_inputs) != 1 or len(outputs) != 1:
            raise ShapeMismatch(
                f"{path}: expected exactly one input and one output, got {len(real_inputs)}/{len(outputs)}"
            )
        in_name, in_shape = real_inputs[0]
        out_name, out_shape = outputs[0]
        if len(in_shape) != 4:
            raise ShapeMismatch(f"{path}: input must be NxCxHxW, got shape {in_shape}")
        _, c, h, w = in_shape
        if None in (c, h, w):
            raise ShapeMismatch(f"{path}: C, H, W must be static, got {in_shape}")
        if not out_shape or out_shape[-1] != N_LABELS:
            raise ShapeMismatch(
                f"{path}: output head must be {N_LABELS}-way, got shape {out_shape}"
            )
        self.name = f"model:{path}"
        self.input_size = (w, h)
        self._channels = c
        self._in_name = in_name
        self._out_name = out_name
        self._nodes = nodes
        self._inits = inits

    def _forward_one(self, px: np.ndarray) -> np.ndarray:
        x = px.astype(np.float32) / 255.0
        x = np.broadcast_to(x, (self._channels,) + x.shape)[np.newaxis, ...].copy()
        values = dict(self._inits)
        values[self._in_name] = x
        _evaluate(self._nodes, values)
        logits = values[self._out_name].reshape(-1).astype(np.float64)
        z = np.exp(logits - logits.max())
        return z / z.sum()

    def classify_batch(self, pixels: np.ndarray) -> np.ndarray:
        # one sample at a time so results are independent of caller batching
        return np.stack([self._forward_one(px) for px in pixels])
