"""Binary weight (``FLRW``) and matrix (``FLRM``) files.

FLRW layout, all integers little-endian::

    b"FLRW"  u32 version=1  u32 layer_count
    per layer:
        u8 kind (0 dense, 1 factored)  u8 activation (0 none, 1 relu)
        u32 d_in  u32 d_out  [u32 k, factored only]
        f64 payload, row-major:
            dense:    W (d_in x d_out), bias (d_out)
            factored: u_hat (d_in x k), s_hat (k), v_hat (k x d_out), bias (d_out)
        factored only: u_mask then v_mask, each row-major bits packed
        most-significant-bit first and padded to a whole byte.

FLRM layout: ``b"FLRM" u32 version=1 u32 rows u32 cols`` then row-major f64.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError
from .network import DenseLayer, FactoredLayer, Network

MAGIC = b"FLRW"
MATRIX_MAGIC = b"FLRM"
VERSION = 1
_ACT = {"none": 0, "relu": 1}
_ACT_INV = {v: k for k, v in _ACT.items()}


def _f64(a) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def _bits(mask: np.ndarray) -> bytes:
    return np.packbits(np.asarray(mask, dtype=bool).reshape(-1), bitorder="big").tobytes()


def encode_network(net: Network) -> bytes:
    parts = [MAGIC, struct.pack("<II", VERSION, len(net.layers))]
    for layer in net.layers:
        act = _ACT[layer.activation]
        if isinstance(layer, FactoredLayer):
            parts.append(struct.pack("<BBIII", 1, act, layer.d_in, layer.d_out, layer.k))
            parts += [_f64(layer.u_hat), _f64(layer.s_hat), _f64(layer.v_hat), _f64(layer.bias)]
            parts += [_bits(layer.u_mask), _bits(layer.v_mask)]
        else:
            parts.append(struct.pack("<BBII", 0, act, layer.d_in, layer.d_out))
            parts += [_f64(layer.weights), _f64(layer.bias)]
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("truncated file")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, *shape) -> np.ndarray:
        n = int(np.prod(shape))
        return np.frombuffer(self.take(8 * n), dtype="<f8").astype(np.float64).reshape(shape)

    def bits(self, *shape) -> np.ndarray:
        n = int(np.prod(shape))
        raw = np.frombuffer(self.take((n + 7) // 8), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="big")[:n].astype(bool).reshape(shape)


def decode_network(data: bytes) -> Network:
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise FormatError("not an FLRW file")
    version, count = r.unpack("<II")
    if version != VERSION:
        raise FormatError(f"unsupported FLRW version {version}")
    layers = []
    for _ in range(count):
        kind, act, d_in, d_out = r.unpack("<BBII")
        if act not in _ACT_INV:
            raise FormatError(f"unknown activation code {act}")
        if kind == 0:
            w = r.floats(d_in, d_out)
            b = r.floats(d_out)
            layers.append(DenseLayer(w, b, _ACT_INV[act]))
        elif kind == 1:
            (k,) = r.unpack("<I")
            u = r.floats(d_in, k)
            s = r.floats(k)
            v = r.floats(k, d_out)
            b = r.floats(d_out)
            um = r.bits(d_in, k)
            vm = r.bits(k, d_out)
            layers.append(FactoredLayer(u, s, v, b, _ACT_INV[act], um, vm))
        else:
            raise FormatError(f"unknown layer kind {kind}")
    if r.pos != len(data):
        raise FormatError("trailing bytes after last layer")
    if not layers:
        raise FormatError("no layers")
    return Network(layers, layers[-1].d_out)


def save_network(net: Network, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_network(net))


def load_network(path) -> Network:
    with open(path, "rb") as fh:
        return decode_network(fh.read())


def encode_matrix(m: np.ndarray) -> bytes:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise FormatError("only 2-D matrices can be stored")
    return MATRIX_MAGIC + struct.pack("<III", VERSION, *m.shape) + _f64(m)


def decode_matrix(data: bytes) -> np.ndarray:
    r = _Reader(data)
    if r.take(4) != MATRIX_MAGIC:
        raise FormatError("not an FLRM file")
    version, rows, cols = r.unpack("<III")
    if version != VERSION:
        raise FormatError(f"unsupported FLRM version {version}")
    m = r.floats(rows, cols)
    if r.pos != len(data):
        raise FormatError("trailing bytes after matrix")
    return m


def save_matrix(m: np.ndarray, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_matrix(m))


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_matrix(fh.read())
