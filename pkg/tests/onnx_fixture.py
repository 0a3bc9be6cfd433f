"""Test-side ONNX fixture encoder.

Encodes model files straight from the protobuf wire specification — an
independent code path from the package's reader, so fixtures exercise real
cross-implementation parsing.
"""

from __future__ import annotations

import struct

import numpy as np


def _varint(value: int) -> bytes:
    if value < 0:
        value += 1 << 64
    out = bytearray()
    while True:
        bits = value & 0x7F
        value >>= 7
        if value:
            out.append(bits | 0x80)
        else:
            out.append(bits)
            return bytes(out)


def _tag(field: int, wire: int) -> bytes:
    return _varint((field << 3) | wire)


def _len_field(field: int, payload: bytes) -> bytes:
    return _tag(field, 2) + _varint(len(payload)) + payload


def _int_field(field: int, value: int) -> bytes:
    return _tag(field, 0) + _varint(value)


def _str_field(field: int, value: str) -> bytes:
    return _len_field(field, value.encode("utf-8"))


def tensor_proto(name: str, array: np.ndarray) -> bytes:
    array = np.asarray(array)
    body = b"".join(_int_field(1, d) for d in array.shape)
    if array.dtype == np.int64:
        body += _int_field(2, 7)
    else:
        array = array.astype(np.float32)
        body += _int_field(2, 1)
    body += _str_field(8, name)
    body += _len_field(9, array.tobytes("C"))
    return body


def value_info(name: str, shape: list[int | str]) -> bytes:
    dims = b""
    for d in shape:
        if isinstance(d, str):
            dims += _len_field(1, _str_field(2, d))
        else:
            dims += _len_field(1, _int_field(1, d))
    tensor_type = _int_field(1, 1) + _len_field(2, dims)  # elem_type FLOAT + shape
    return _str_field(1, name) + _len_field(2, _len_field(1, tensor_type))


def attr_int(name: str, value: int) -> bytes:
    return _str_field(1, name) + _int_field(3, value) + _int_field(20, 2)


def attr_ints(name: str, values: list[int]) -> bytes:
    body = _str_field(1, name)
    for v in values:
        body += _int_field(8, v)
    return body + _int_field(20, 7)


def attr_float(name: str, value: float) -> bytes:
    return _str_field(1, name) + _tag(2, 5) + struct.pack("<f", value) + _int_field(20, 1)


def node(op_type: str, inputs: list[str], outputs: list[str],
         attrs: list[bytes] = ()) -> bytes:
    body = b"".join(_str_field(1, i) for i in inputs)
    body += b"".join(_str_field(2, o) for o in outputs)
    body += _str_field(4, op_type)
    body += b"".join(_len_field(5, a) for a in attrs)
    return body


def model_bytes(nodes: list[bytes], initializers: list[bytes],
                inputs: list[bytes], outputs: list[bytes],
                opset: int = 13, producer: str = "fixture") -> bytes:
    graph = b"".join(_len_field(1, n) for n in nodes)
    graph += _str_field(2, "g")
    graph += b"".join(_len_field(5, t) for t in initializers)
    graph += b"".join(_len_field(11, vi) for vi in inputs)
    graph += b"".join(_len_field(12, vi) for vi in outputs)
    opset_id = _str_field(1, "") + _int_field(2, opset)
    return (_int_field(1, 8)  # ir_version
            + _str_field(2, producer)
            + _len_field(7, graph)
            + _len_field(8, opset_id))


def linear_model(weights: np.ndarray, bias: np.ndarray, height: int, width: int,
                 opset: int = 13) -> bytes:
    """x (Nx1xHxW) -> Flatten -> Gemm(W^T, b) -> logits (N x out)."""
    out_dim = weights.shape[0]
    return model_bytes(
        nodes=[
            node("Flatten", ["input"], ["flat"], [attr_int("axis", 1)]),
            node("Gemm", ["flat", "w", "b"], ["logits"],
                 [attr_int("transB", 1), attr_float("alpha", 1.0), attr_float("beta", 1.0)]),
        ],
        initializers=[tensor_proto("w", weights.astype(np.float32)),
                      tensor_proto("b", bias.astype(np.float32))],
        inputs=[value_info("input", ["N", 1, height, width])],
        outputs=[value_info("logits", ["N", out_dim])],
        opset=opset,
    )


def conv_model(kernels: np.ndarray, conv_bias: np.ndarray, fc_w: np.ndarray,
               fc_b: np.ndarray, height: int, width: int) -> bytes:
    """Conv(3x3, pad 1) -> Relu -> GlobalAveragePool -> Flatten -> Gemm."""
    out_dim = fc_w.shape[0]
    return model_bytes(
        nodes=[
            node("Conv", ["input", "k", "kb"], ["conv"],
                 [attr_ints("kernel_shape", [3, 3]), attr_ints("pads", [1, 1, 1, 1]),
                  attr_ints("strides", [1, 1])]),
            node("Relu", ["conv"], ["act"]),
            node("GlobalAveragePool", ["act"], ["pooled"]),
            node("Flatten", ["pooled"], ["flat"], [attr_int("axis", 1)]),
            node("Gemm", ["flat", "w", "b"], ["logits"], [attr_int("transB", 1)]),
        ],
        initializers=[
            tensor_proto("k", kernels.astype(np.float32)),
            tensor_proto("kb", conv_bias.astype(np.float32)),
            tensor_proto("w", fc_w.astype(np.float32)),
            tensor_proto("b", fc_b.astype(np.float32)),
        ],
        inputs=[value_info("input", ["N", 1, height, width])],
        outputs=[value_info("logits", ["N", out_dim])],
    )
