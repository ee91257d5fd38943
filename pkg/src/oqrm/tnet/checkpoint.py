"""Binary checkpoint of an MPS for resuming long runs.

Layout (all little-endian)::

    magic      8 bytes  b"OQRMMPS\\0"
    version    uint32   (currently 1)
    n_sites    uint32
    center     uint32
    max_bond   uint32
    cutoff     float64
    is_complex uint32   (1: each amplitude is a (re, im) pair of float64)
    dims       n_sites * 3 * uint64   (left, phys, right)
    data       float64 values of every tensor, C order, site by site
"""
from __future__ import annotations

import struct

import numpy as np

from .mps import MpsState

MAGIC = b"OQRMMPS\0"
VERSION = 1
_HEAD = struct.Struct("<8sIIIIdI")


def save_mps(psi: MpsState, path) -> None:
    is_complex = np.iscomplexobj(np.empty(0, dtype=psi.dtype))
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, len(psi), psi.center, psi.max_bond, psi.cutoff, int(is_complex)))
        dims = np.array([a.shape for a in psi.tensors], dtype="<u8")
        fh.write(dims.tobytes())
        for a in psi.tensors:
            dt = "<c16" if is_complex else "<f8"
            fh.write(np.ascontiguousarray(a, dtype=dt).tobytes())


def load_mps(path) -> MpsState:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEAD.size:
        raise ValueError(f"{path}: truncated checkpoint header")
    magic, version, n, center, max_bond, cutoff, is_complex = _HEAD.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: not an MPS checkpoint")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    off = _HEAD.size
    dims = np.frombuffer(raw, dtype="<u8", count=3 * n, offset=off).reshape(n, 3)
    off += dims.nbytes
    dt = np.dtype("<c16" if is_complex else "<f8")
    tensors = []
    for shape in dims:
        count = int(np.prod(shape))
        a = np.frombuffer(raw, dtype=dt, count=count, offset=off).reshape(tuple(int(x) for x in shape))
        tensors.append(a.astype(complex if is_complex else float))
        off += count * dt.itemsize
    if off != len(raw):
        raise ValueError(f"{path}: trailing bytes in checkpoint")
    return MpsState(tensors, center, max_bond, cutoff)
