"""Flat binary checkpoints.

Layout, all little endian::

    b"CRLKCKPT"  u32 version  u32 n_records
    record := u8 kind  u16 name_len  name(utf-8)  body
    kind 0, network := u32 n_sizes  u32 sizes[n_sizes]  u8 activation
                       u8 layer_norm_first  f64 W0 (row major) f64 b0 ...
    kind 1, array   := u32 ndim  u32 shape[ndim]  f64 data (row major)
"""
import logging
import os
import struct

import numpy as np

from crlkit import exception
from crlkit.numcore import net as net_mod


LOG = logging.getLogger("CRLKIT")

MAGIC = b"CRLKCKPT"
VERSION = 1
KIND_NET = 0
KIND_ARRAY = 1
_F64 = np.dtype("<f8")


def _write_name(fp, name):
    raw = name.encode("utf-8")
    fp.write(struct.pack("<H", len(raw)))
    fp.write(raw)


def _write_f64(fp, arr):
    fp.write(np.ascontiguousarray(arr, dtype=_F64).tobytes(order="C"))


def save(path, nets=None, arrays=None):
    """Write named DenseNets and float arrays to ``path``."""
    nets = nets or {}
    arrays = arrays or {}
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "wb") as fp:
        fp.write(MAGIC)
        fp.write(struct.pack("<II", VERSION, len(nets) + len(arrays)))
        for name, net in nets.items():
            fp.write(struct.pack("<B", KIND_NET))
            _write_name(fp, name)
            fp.write(struct.pack("<I", len(net.layer_sizes)))
            fp.write(struct.pack(f"<{len(net.layer_sizes)}I", *net.layer_sizes))
            fp.write(struct.pack(
                "<BB",
                net_mod.ACTIVATIONS.index(net.activation),
                int(net.layer_norm_first),
            ))
            for p in net.params():
                _write_f64(fp, p)
        for name, arr in arrays.items():
            arr = np.asarray(arr, dtype=np.float64)
            fp.write(struct.pack("<B", KIND_ARRAY))
            _write_name(fp, name)
            fp.write(struct.pack("<I", arr.ndim))
            if arr.ndim:
                fp.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            _write_f64(fp, arr)
    os.replace(tmp_path, path)
    LOG.info(f"Saved checkpoint with {len(nets)} nets and {len(arrays)} arrays to {path}")


class _Reader:
    def __init__(self, data, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n):
        if self.pos + n > len(self.data):
            raise exception.ConfigurationError(f"Checkpoint {self.path} is truncated")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def f64(self, shape):
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(self.take(8 * count), dtype=_F64).astype(np.float64)
        return arr.reshape(shape)


def load(path):
    """Read a checkpoint back as ``(nets, arrays)`` dictionaries."""
    if not os.path.exists(path):
        raise exception.ConfigurationError(f"Checkpoint {path} doesn't exist")
    with open(path, "rb") as fp:
        reader = _Reader(fp.read(), path)
    if reader.take(len(MAGIC)) != MAGIC:
        raise exception.ConfigurationError(f"{path} is not a crlkit checkpoint")
    version, n_records = reader.unpack("<II")
    if version != VERSION:
        raise exception.ConfigurationError(
            f"Checkpoint {path} has version {version}, expected {VERSION}",
        )
    nets, arrays = {}, {}
    for _ in range(n_records):
        (kind,) = reader.unpack("<B")
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        if kind == KIND_NET:
            (n_sizes,) = reader.unpack("<I")
            sizes = list(reader.unpack(f"<{n_sizes}I"))
            act_idx, ln_flag = reader.unpack("<BB")
            weights, biases = [], []
            for n_in, n_out in zip(sizes[:-1], sizes[1:]):
                weights.append(reader.f64((n_out, n_in)))
                biases.append(reader.f64((n_out,)))
            nets[name] = net_mod.DenseNet(
                sizes, weights, biases,
                activation=net_mod.ACTIVATIONS[act_idx],
                layer_norm_first=bool(ln_flag),
            )
        elif kind == KIND_ARRAY:
            (ndim,) = reader.unpack("<I")
            shape = tuple(reader.unpack(f"<{ndim}I")) if ndim else ()
            arrays[name] = reader.f64(shape)
        else:
            raise exception.ConfigurationError(
                f"Checkpoint {path} has an unknown record kind {kind}",
            )
    LOG.debug(f"Loaded {len(nets)} nets and {len(arrays)} arrays from {path}")
    return nets, arrays
